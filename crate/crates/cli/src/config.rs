//! Plain-text `key = value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated. Descriptors take the rest of the line, so they
//! may contain commas. Unknown keys are rejected. Writing a config out emits
//! every key in a fixed order, and reading it back yields the same value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown step `{0}`")]
    UnknownStep(String),
}

pub const PRESETS: [&str; 11] = [
    "parseval",
    "oversample",
    "landau",
    "seip",
    "example51",
    "triangle-noframe",
    "invsqrt-noframe",
    "prop24",
    "bernoulli-tile",
    "mass-decay",
    "translate",
];

/// Pipeline stages available to custom runs.
pub const STEPS: [&str; 12] = [
    "density",
    "separation",
    "essential-bounds",
    "bounds",
    "scan",
    "lower-diagnostic",
    "upper-diagnostic",
    "verdict",
    "mass-decay",
    "tile",
    "epsilon",
    "translate",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// A preset name, or `custom` to run `steps`.
    pub preset: String,
    pub measure: String,
    pub spectrum: String,
    /// Spectra are truncated to `[center − window, center + window]`.
    pub window: f64,
    pub center: f64,
    /// Base grid for frame bounds.
    pub grid: usize,
    /// Grid doublings after the base level.
    pub refine: usize,
    /// Grid fixing the normalization of density measures.
    pub measure_grid: usize,
    pub diagnostic_grid: usize,
    pub seed: u64,
    pub samples: usize,
    /// Depth of attractor covers for tile verdicts.
    pub depth: usize,
    pub h_list: Vec<f64>,
    pub lower_ks: Vec<usize>,
    pub upper_ks: Vec<usize>,
    pub xi_step: f64,
    pub bessel: f64,
    pub margin: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub translations: usize,
    pub target_gap: f64,
    pub steps: Vec<String>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "custom".into(),
            measure: "uniform(0,1)".into(),
            spectrum: "lattice(1,0)".into(),
            window: 200.0,
            center: 0.0,
            grid: 128,
            refine: 2,
            measure_grid: 256,
            diagnostic_grid: 1 << 18,
            seed: 7,
            samples: 1_000_000,
            depth: 16,
            h_list: vec![10.0, 40.0, 100.0],
            lower_ks: vec![2, 4, 8, 16, 32],
            upper_ks: vec![2, 4, 8, 16],
            xi_step: 1.0 / 512.0,
            bessel: 1.0,
            margin: 1e-3,
            n_min: 4,
            n_max: 10,
            translations: 3,
            target_gap: 0.5,
            steps: vec!["density".into(), "bounds".into()],
            out: PathBuf::from("framelab-out"),
        }
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() }))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

impl ExperimentConfig {
    /// Defaults for a preset, with `preset` set.
    pub fn for_preset(name: &str) -> Result<Self, ConfigError> {
        let mut c = Self { preset: name.to_string(), ..Self::default() };
        match name {
            "custom" => {}
            "parseval" => {
                c.grid = 256;
                c.refine = 0;
                c.steps = vec!["bounds".into()];
            }
            "oversample" => {
                c.spectrum = "lattice(0.5,0)".into();
                c.window = 128.0;
                c.grid = 256;
                c.refine = 0;
            }
            "landau" => {
                c.measure = "uniform(0,2)".into();
                c.window = 256.0;
            }
            "seip" => {
                c.spectrum = "jitter(1/1.2,0.2)".into();
                c.window = 160.0;
                c.grid = 64;
            }
            "example51" | "triangle-noframe" => c.measure = "triangle".into(),
            "invsqrt-noframe" => c.measure = "invsqrt".into(),
            "prop24" => {
                c.spectrum = "jitter(1,0.45)".into();
                c.window = 1700.0;
                c.seed = 24;
            }
            "bernoulli-tile" => c.measure = "bernoulli(0.5)".into(),
            "mass-decay" => c.measure = "bernoulli(0.7)".into(),
            "translate" => {
                c.window = 64.0;
                c.refine = 0;
                c.seed = 11;
            }
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "preset" => {
                if v != "custom" && !PRESETS.contains(&v) {
                    return Err(ConfigError::UnknownPreset(v.to_string()));
                }
                self.preset = v.to_string();
            }
            "measure" => self.measure = v.to_string(),
            "spectrum" => self.spectrum = v.to_string(),
            "window" => self.window = parse_one("window", v)?,
            "center" => self.center = parse_one("center", v)?,
            "grid" => self.grid = parse_one("grid", v)?,
            "refine" => self.refine = parse_one("refine", v)?,
            "measure_grid" => self.measure_grid = parse_one("measure_grid", v)?,
            "diagnostic_grid" => self.diagnostic_grid = parse_one("diagnostic_grid", v)?,
            "seed" => self.seed = parse_one("seed", v)?,
            "samples" => self.samples = parse_one("samples", v)?,
            "depth" => self.depth = parse_one("depth", v)?,
            "h_list" => self.h_list = parse_list("h_list", v)?,
            "lower_ks" => self.lower_ks = parse_list("lower_ks", v)?,
            "upper_ks" => self.upper_ks = parse_list("upper_ks", v)?,
            "xi_step" => self.xi_step = parse_one("xi_step", v)?,
            "bessel" => self.bessel = parse_one("bessel", v)?,
            "margin" => self.margin = parse_one("margin", v)?,
            "n_min" => self.n_min = parse_one("n_min", v)?,
            "n_max" => self.n_max = parse_one("n_max", v)?,
            "translations" => self.translations = parse_one("translations", v)?,
            "target_gap" => self.target_gap = parse_one("target_gap", v)?,
            "steps" => {
                let steps: Vec<String> = parse_list("steps", v)?;
                if let Some(bad) = steps.iter().find(|s| !STEPS.contains(&s.as_str())) {
                    return Err(ConfigError::UnknownStep(bad.clone()));
                }
                self.steps = steps;
            }
            "out" => self.out = PathBuf::from(v),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Apply every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.into() })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// A `preset` line, if present, selects the defaults the rest is applied to.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let preset = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('='))
            .find(|(k, _)| k.trim() == "preset")
            .map(|(_, v)| v.trim().to_string());
        let mut cfg = match preset {
            Some(p) => Self::for_preset(&p)?,
            None => Self::default(),
        };
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every key and its value, in the order they are written out.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("preset", self.preset.clone()),
            ("measure", self.measure.clone()),
            ("spectrum", self.spectrum.clone()),
            ("window", self.window.to_string()),
            ("center", self.center.to_string()),
            ("grid", self.grid.to_string()),
            ("refine", self.refine.to_string()),
            ("measure_grid", self.measure_grid.to_string()),
            ("diagnostic_grid", self.diagnostic_grid.to_string()),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
            ("depth", self.depth.to_string()),
            ("h_list", list(&self.h_list)),
            ("lower_ks", list(&self.lower_ks)),
            ("upper_ks", list(&self.upper_ks)),
            ("xi_step", self.xi_step.to_string()),
            ("bessel", self.bessel.to_string()),
            ("margin", self.margin.to_string()),
            ("n_min", self.n_min.to_string()),
            ("n_max", self.n_max.to_string()),
            ("translations", self.translations.to_string()),
            ("target_gap", self.target_gap.to_string()),
            ("steps", list(&self.steps)),
            ("out", self.out.display().to_string()),
        ]
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        for name in PRESETS.iter().chain(&["custom"]) {
            let cfg = ExperimentConfig::for_preset(name).unwrap();
            let text = cfg.to_string();
            let back = ExperimentConfig::parse(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn odd_floats_survive() {
        let mut cfg = ExperimentConfig::default();
        cfg.xi_step = 1.0 / 3.0;
        cfg.margin = 1e-300;
        cfg.h_list = vec![0.1, 2.0 / 7.0];
        assert_eq!(ExperimentConfig::parse(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn preset_line_selects_defaults() {
        let cfg = ExperimentConfig::parse("# comment\npreset = seip\ngrid = 32\n").unwrap();
        assert_eq!(cfg.spectrum, "jitter(1/1.2,0.2)");
        assert_eq!(cfg.grid, 32);
    }

    #[test]
    fn descriptors_keep_commas() {
        let cfg = ExperimentConfig::parse("spectrum = union(lattice(1,0), lattice(1,1/3))").unwrap();
        assert_eq!(cfg.spectrum, "union(lattice(1,0), lattice(1,1/3))");
    }

    #[test]
    fn malformed_configs_are_rejected() {
        assert!(matches!(ExperimentConfig::parse("grid 12"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ExperimentConfig::parse("grid = twelve"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ExperimentConfig::parse("preset = nope"), Err(ConfigError::UnknownPreset(_))));
        assert!(matches!(ExperimentConfig::parse("steps = bounds,dance"), Err(ConfigError::UnknownStep(_))));
    }
}
