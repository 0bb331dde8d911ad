use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Op {
    pub fn holds(self, observed: f64, bound: f64) -> bool {
        match self {
            Op::Lt => observed < bound,
            Op::Le => observed <= bound,
            Op::Gt => observed > bound,
            Op::Ge => observed >= bound,
        }
    }
}

/// `observed op bound`; `pass` is recomputable from the other fields.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub op: Op,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, op: Op, bound: f64) -> Self {
        Self { name: name.into(), observed, op, bound, pass: op.holds(observed, bound) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub experiment: String,
    pub inputs: BTreeMap<String, String>,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// CSV files written next to the report.
    pub files: Vec<String>,
    /// Kept out of `report.json` so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_clock: Duration,
    #[serde(skip)]
    pub budget: Option<Duration>,
    #[serde(skip)]
    pub tables: Vec<(String, Vec<u8>)>,
}

impl VerdictReport {
    pub fn new(experiment: &str, inputs: BTreeMap<String, String>) -> Self {
        Self {
            experiment: experiment.to_string(),
            inputs,
            results: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
            files: Vec::new(),
            wall_clock: Duration::ZERO,
            budget: None,
            tables: Vec::new(),
        }
    }

    pub fn put<T: Serialize + ?Sized>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.results.insert(key.to_string(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn table(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push(name.to_string());
        self.tables.push((name.to_string(), bytes));
    }

    /// Re-derives the verdict from the recorded numbers.
    pub fn recheck(&self) -> bool {
        self.checks.iter().all(|c| c.op.holds(c.observed, c.bound))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn within_budget(&self) -> Option<bool> {
        self.budget.map(|b| self.wall_clock <= b)
    }

    /// Wall-clock lines for `timing.txt`.
    pub fn timing_text(&self) -> String {
        let mut t = format!("wall_clock_secs = {:.3}\n", self.wall_clock.as_secs_f64());
        if let (Some(b), Some(ok)) = (self.budget, self.within_budget()) {
            t += &format!("budget_secs = {}\nwithin_budget = {ok}\n", b.as_secs());
        }
        t
    }

    /// Writes `report.json`, the CSV tables, `config.txt` and `timing.txt` into `dir`.
    pub fn write(&self, dir: &Path, config_text: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(dir.join("config.txt"), config_text)?;
        fs::write(dir.join("timing.txt"), self.timing_text())?;
        for (name, bytes) in &self.tables {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_follow_their_numbers() {
        let mut r = VerdictReport::new("x", BTreeMap::new());
        r.check(Check::new("a", 0.1, Op::Lt, 0.2));
        assert!(r.pass);
        r.check(Check::new("b", 0.3, Op::Le, 0.2));
        assert!(!r.pass && !r.recheck());
        assert!(r.to_json().contains("\"op\": \"<=\""));
    }
}
