use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use framelab_cli::{run_pipeline, ConfigError, ExperimentConfig, RunError};

/// Numerical experiments on Fourier frames of measures on the line.
///
/// Settings are layered: preset defaults, then the config file, then the
/// dedicated flags, then `--set` assignments in order.
#[derive(Parser, Debug)]
#[command(name = "framelab", version)]
struct Cli {
    /// A preset name, or `run` to take everything from the config file.
    experiment: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    /// Half-width of the spectrum window.
    #[arg(long)]
    window: Option<f64>,
    /// Extra `key=value` assignment; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let text = match &cli.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?),
        None => None,
    };
    let mut cfg = match (cli.experiment.as_str(), &text) {
        ("run", Some(t)) => ExperimentConfig::parse(t)?,
        ("run", None) => return Err(RunError::Input("`run` needs --config".into())),
        (name, t) => {
            let mut c = ExperimentConfig::for_preset(name)?;
            if let Some(t) = t {
                c.apply_text(t)?;
                c.preset = name.to_string();
            }
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    if let Some(window) = cli.window {
        cfg.window = window;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: kv.clone() })?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Err(e) = report.write(&cfg.out, &cfg.to_string()) {
        eprintln!("error: cannot write to {}: {e}", cfg.out.display());
        return ExitCode::from(1);
    }
    for c in &report.checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        let op = serde_json::to_value(c.op).map(|v| v.as_str().unwrap_or("?").to_string()).unwrap_or_default();
        println!("{mark}  {}: {} {op} {}", c.name, c.observed, c.bound);
    }
    match report.within_budget() {
        Some(false) => eprintln!("warning: {} took {:.2?}, over its time budget", report.experiment, report.wall_clock),
        _ => eprintln!("{} finished in {:.2?}", report.experiment, report.wall_clock),
    }
    println!("{} -> {}", if report.pass { "PASS" } else { "FAIL" }, cfg.out.join("report.json").display());
    ExitCode::from(if report.pass { 0 } else { 1 })
}
