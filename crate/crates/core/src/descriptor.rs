//! Config-text descriptors such as `uniform(0,1)`, `jitter(1,0.4,seed=7)`
//! or `ifs(lambda=0.5, digits=[0,0.5])`.
//!
//! The grammar is deliberately small:
//!
//! ```text
//! expr  := word [ '(' [ arg { ',' arg } ] ')' ]
//! arg   := word '=' value | value
//! value := number | '[' [ value { ',' value } ] ']' | expr
//! ```
//!
//! A bare word that does not parse as a number is kept verbatim, which is how
//! file paths in `grid(path)` are carried.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected end of descriptor `{0}`")]
    UnexpectedEnd(String),
    #[error("unexpected character `{ch}` at offset {pos} in `{text}`")]
    Unexpected { ch: char, pos: usize, text: String },
    #[error("unknown descriptor `{0}`")]
    Unknown(String),
    #[error("descriptor `{name}`: {msg}")]
    BadArgs { name: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Word(String),
    List(Vec<Value>),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Arg>,
}

impl Call {
    pub fn parse(text: &str) -> Result<Call, ParseError> {
        let mut p = Parser { text, pos: 0 };
        let v = p.value()?;
        p.skip_ws();
        if let Some(ch) = p.peek() {
            return Err(p.unexpected(ch));
        }
        match v {
            Value::Call(c) => Ok(c),
            Value::Word(w) => Ok(Call { name: w, args: Vec::new() }),
            _ => Err(ParseError::Unknown(text.trim().to_string())),
        }
    }

    fn bad(&self, msg: impl Into<String>) -> ParseError {
        ParseError::BadArgs { name: self.name.clone(), msg: msg.into() }
    }

    /// Positional arguments, in order.
    pub fn positional(&self) -> impl Iterator<Item = &Value> {
        self.args.iter().filter(|a| a.key.is_none()).map(|a| &a.value)
    }

    pub fn keyword(&self, key: &str) -> Option<&Value> {
        self.args.iter().find(|a| a.key.as_deref() == Some(key)).map(|a| &a.value)
    }

    /// Numeric argument by keyword, falling back to the `index`-th positional.
    pub fn number(&self, key: &str, index: usize) -> Result<f64, ParseError> {
        self.number_opt(key, index)?.ok_or_else(|| self.bad(format!("missing argument `{key}`")))
    }

    pub fn number_opt(&self, key: &str, index: usize) -> Result<Option<f64>, ParseError> {
        let v = self.keyword(key).or_else(|| self.positional().nth(index));
        match v {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(other) => Err(self.bad(format!("`{key}` must be a number, got {other}"))),
        }
    }

    pub fn numbers(&self, key: &str, index: usize) -> Result<Vec<f64>, ParseError> {
        let v = self
            .keyword(key)
            .or_else(|| self.positional().nth(index))
            .ok_or_else(|| self.bad(format!("missing argument `{key}`")))?;
        match v {
            Value::List(items) => items
                .iter()
                .map(|i| match i {
                    Value::Number(x) => Ok(*x),
                    other => Err(self.bad(format!("`{key}` entries must be numbers, got {other}"))),
                })
                .collect(),
            other => Err(self.bad(format!("`{key}` must be a list, got {other}"))),
        }
    }

    pub fn expect_arity(&self, max: usize) -> Result<(), ParseError> {
        if self.args.len() > max {
            return Err(self.bad(format!("expected at most {max} arguments, got {}", self.args.len())));
        }
        Ok(())
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn unexpected(&self, ch: char) -> ParseError {
        ParseError::Unexpected { ch, pos: self.pos, text: self.text.to_string() }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, '(' | ')' | '[' | ']' | ',' | '=') || c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
        self.text[start..self.pos].to_string()
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd(self.text.to_string())),
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Value::List(items));
                        }
                        Some(c) => return Err(self.unexpected(c)),
                        None => return Err(ParseError::UnexpectedEnd(self.text.to_string())),
                    }
                }
            }
            Some(c) if matches!(c, '(' | ')' | ']' | ',' | '=') => Err(self.unexpected(c)),
            Some(_) => {
                let w = self.word();
                self.skip_ws();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    let args = self.args()?;
                    return Ok(Value::Call(Call { name: w, args }));
                }
                Ok(match parse_number(&w) {
                    Some(x) => Value::Number(x),
                    None => Value::Word(w),
                })
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            let value = self.value()?;
            self.skip_ws();
            let arg = if self.peek() == Some('=') {
                let key = match value {
                    Value::Word(w) => w,
                    _ => return Err(self.unexpected('=')),
                };
                self.pos += 1;
                Arg { key: Some(key), value: self.value()? }
            } else {
                Arg { key: None, value }
            };
            args.push(arg);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(args);
                }
                Some(c) => return Err(self.unexpected(c)),
                None => return Err(ParseError::UnexpectedEnd(self.text.to_string())),
            }
        }
    }
}

/// Numbers accept plain floats plus `a/b` fractions such as `1/3`.
fn parse_number(w: &str) -> Option<f64> {
    if let Ok(x) = w.parse::<f64>() {
        return Some(x);
    }
    let (a, b) = w.split_once('/')?;
    let (a, b) = (a.parse::<f64>().ok()?, b.parse::<f64>().ok()?);
    (b != 0.0).then_some(a / b)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Word(w) => f.write_str(w),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Call(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if let Some(k) = &a.key {
                write!(f, "{k}=")?;
            }
            write!(f, "{}", a.value)?;
        }
        f.write_str(")")
    }
}
