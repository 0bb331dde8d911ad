use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use framelab_cli::{run_preset, ExperimentConfig};

fn framelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framelab")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn passing_preset_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = framelab(&["parseval", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["experiment"], "parseval");
    assert_eq!(r["pass"], true);
    assert!(dir.path().join("frame_bounds.csv").exists());
    let cfg = ExperimentConfig::parse(&fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
    assert_eq!(cfg.preset, "parseval");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = framelab(&["seip", "--seed", "5", "--grid", "32", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.code().is_some());
    }
    for f in ["report.json", "density.csv", "frame_bounds.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = framelab(&["oversample", "--set", "spectrum=lattice(1,0)", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path());
    assert_eq!(r["pass"], false);
    // the verdict follows from the recorded numbers alone
    for c in r["checks"].as_array().unwrap() {
        let (x, b) = (c["observed"].as_f64().unwrap(), c["bound"].as_f64().unwrap());
        let holds = match c["op"].as_str().unwrap() {
            "<" => x < b,
            "<=" => x <= b,
            ">" => x > b,
            _ => x >= b,
        };
        assert_eq!(holds, c["pass"].as_bool().unwrap());
    }
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.txt");
    fs::write(&cfg, "preset = custom\nthis line has no assignment\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();
    assert_eq!(framelab(&["run", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(framelab(&["run", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    assert_eq!(framelab(&["no-such-preset", "--out", out]).status.code(), Some(2));
    assert_eq!(framelab(&["parseval", "--set", "measure=wobble(3)", "--out", out]).status.code(), Some(2));
    assert_eq!(framelab(&["parseval", "--set", "grid", "--out", out]).status.code(), Some(2));
    assert_eq!(framelab(&["run", "--out", out]).status.code(), Some(2));
    assert!(!out_dir.join("report.json").exists());
}

#[test]
fn custom_mass_decay_halves_each_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("decay.txt");
    fs::write(&cfg, "preset = custom\nmeasure = ifs(0.7)\nsteps = mass-decay\nsamples = 200000\nn_min = 6\nn_max = 9\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = framelab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("mass_decay.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    let ratios: Vec<f64> = rdr.records().map(|r| r.unwrap()[6].parse().unwrap()).collect();
    assert_eq!(ratios, vec![0.5; 4]);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.txt");
    fs::write(&cfg, "seed = 3\ntranslations = 2\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = framelab(&["translate", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["inputs"]["seed"], "9");
    assert_eq!(r["inputs"]["translations"], "2");
    assert_eq!(r["results"]["translations"].as_array().unwrap().len(), 2);
}

#[test]
fn run_preset_applies_overrides() {
    let r = run_preset("oversample", &[("grid".into(), "128".into())]).unwrap();
    assert!(r.pass && r.recheck());
    assert_eq!(r.inputs["grid"], "128");
    assert!(run_preset("oversample", &[("grid".into(), "many".into())]).is_err());
}
