use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nslab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nslab"))
        .args(args)
        .env("NSLAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const LIONS: &str = r#"
[domain]
r_inner = 1.0
r_outer = 2.0
n_r = 32
n_theta = 32

[initial]
kind = "pure_circulation"
gamma = 6.283185307179586

[boundary]
kind = "lions"

[run]
nu = 0.01
dt = 0.01
horizon = 0.2
sample_every = 0.1
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_steady_lions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "lions.toml", LIONS);
    let out = tmp.path().join("out");
    let o = nslab(&out, &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let drift: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.trim().strip_prefix("final-state drift "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift <= 1e-3);

    let run = out.join("lions");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(files.contains(&"series.csv"));
    assert!(files.contains(&"snapshots/omega_000010.csv"));
    assert!(files.contains(&"snapshots/velocity_000020.csv"));
    for f in &files {
        assert!(!Path::new(f).is_absolute());
        assert!(run.join(f).is_file(), "{f}");
    }
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);

    let series = fs::read_to_string(run.join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 22);
    let first = series.lines().nth(1).unwrap();
    assert_eq!(first.split(',').next().unwrap(), "0.0000000000000000e0");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[domain]
r_inner = 1.0
r_outer = 2.0
n_r = 24
n_theta = 32

[initial]
kind = "random"
k_max = 3
m_max = 3

[boundary]
kind = "navier"
alpha_inner = 1.0
alpha_outer = 0.5

[run]
nu = 0.02
dt = 0.005
horizon = 0.05
seed = 11
"#;
    let cfg = write_config(tmp.path(), "rand.toml", text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(nslab(&a, &["simulate", cfg.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(nslab(&b, &["simulate", cfg.to_str().unwrap()]).status.code(), Some(0));
    for f in ["series.csv", "snapshots/omega_000010.csv", "manifest.json", "config.toml"] {
        assert_eq!(
            fs::read(a.join("rand").join(f)).unwrap(),
            fs::read(b.join("rand").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn ladder_levels_get_their_own_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let text = LIONS.replace("n_theta = 32", "n_theta = 32\nladder = [[48, 48]]");
    let cfg = write_config(tmp.path(), "ladder.toml", &text);
    let out = tmp.path().join("out");
    let o = nslab(&out, &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("ladder/level_48x48/series.csv").is_file());
    assert!(stdout(&o).contains("grid 48x48"));
}

#[test]
fn cfl_violation_aborts_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = LIONS.replace("gamma = 6.283185307179586", "gamma = 200.0").replace(
        "[run]\nnu = 0.01\ndt = 0.01\nhorizon = 0.2\nsample_every = 0.1",
        "[run]\nnu = 0.01\ndt = 0.1\nhorizon = 0.2",
    );
    let cfg = write_config(tmp.path(), "fast.toml", &text);
    let o = nslab(tmp.path(), &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("CFL violation"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let malformed = write_config(tmp.path(), "bad.toml", "[domain\nr_inner = ");
    assert_eq!(nslab(tmp.path(), &["simulate", malformed.to_str().unwrap()]).status.code(), Some(1));
    let unknown = write_config(tmp.path(), "unknown.toml", &LIONS.replace("nu = 0.01", "nu = 0.01\nrho = 1.0"));
    let o = nslab(tmp.path(), &["simulate", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rho"));
    let missing = tmp.path().join("nope.toml");
    assert_eq!(nslab(tmp.path(), &["simulate", missing.to_str().unwrap()]).status.code(), Some(1));
    let bad_domain = write_config(tmp.path(), "dom.toml", &LIONS.replace("r_outer = 2.0", "r_outer = 0.5"));
    assert_eq!(nslab(tmp.path(), &["simulate", bad_domain.to_str().unwrap()]).status.code(), Some(1));
}

const SWEEP: &str = r#"
[domain]
r_inner = 1.0
r_outer = 2.0
n_r = 24
n_theta = 32

[initial]
kind = "patch"
rc = 1.5
radius = 0.25
amplitude = 2.0

[boundary]
kind = "navier"
alpha_inner = 1.0
alpha_outer = 1.0

[run]
nu = 0.05
dt = 0.01
horizon = 0.05

[sweep]
nu = [0.01]
alpha = [10.0, 100.0]
sample_every = 0.01
bootstrap = 20
"#;

#[test]
fn one_point_sweep_notes_undefined_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep.toml", SWEEP);
    let out = tmp.path().join("out");
    let o = nslab(&out, &["sweep", cfg.to_str().unwrap(), "--kind", "nu"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = out.join("sweep_sweep_nu");
    let report = fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(fs::read_to_string(run.join("slopes.txt")).unwrap().contains("slope undefined"));
}

#[test]
fn alpha_sweep_with_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep.toml", SWEEP);
    let out = tmp.path().join("out");
    let o = nslab(&out, &["sweep", cfg.to_str().unwrap(), "--kind", "alpha", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = out.join("sweep_sweep_alpha");
    let report = fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(report.lines().next().unwrap(), "param,E_omega,E_gamma,trace_budget,bound_rhs,pass");
    assert_eq!(report.lines().count(), 3);
    assert!(run.join("series/reference.csv").is_file());
}

#[test]
fn sweep_argument_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep.toml", SWEEP);
    let path = cfg.to_str().unwrap();
    assert_eq!(nslab(tmp.path(), &["sweep", path, "--kind", "gamma"]).status.code(), Some(1));
    assert_eq!(nslab(tmp.path(), &["sweep", path, "--kind", "nu", "--jobs", "0"]).status.code(), Some(1));
    let no_sweep = write_config(tmp.path(), "lions.toml", LIONS);
    assert_eq!(
        nslab(tmp.path(), &["sweep", no_sweep.to_str().unwrap(), "--kind", "nu"]).status.code(),
        Some(1)
    );
}

#[test]
fn theory_bounded_profile_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nslab(tmp.path(), &["theory", "--profile", "constant:1", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("admissibility: admissible"));
    let csv = fs::read_to_string(tmp.path().join("theory_constant_1/rate.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("nu"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!((r[1] - r[2]).abs() <= 1e-6 * r[2]);
    }
}

#[test]
fn theory_power_profile_is_not_admissible() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nslab(tmp.path(), &["theory", "--profile", "power:1:0.5", "--nu-grid", "1e-2,1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("admissibility: not_admissible"));
}

#[test]
fn theory_from_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SWEEP.split("[sweep]").next().unwrap();
    let cfg = write_config(tmp.path(), "patch.toml", text);
    let out = tmp.path().join("out");
    assert_eq!(nslab(&out, &["simulate", cfg.to_str().unwrap()]).status.code(), Some(0));
    let snap = out.join("patch/snapshots/omega_000000.csv");
    let spec = format!("snapshot:{}", snap.display());
    let o = nslab(&out, &["theory", "--profile", &spec, "--nu-grid", "1e-2,1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("admissibility: unknown"));
}

#[test]
fn theory_profile_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nslab(tmp.path(), &["theory"]).status.code(), Some(1));
    assert_eq!(nslab(tmp.path(), &["theory", "--profile", "cubic"]).status.code(), Some(1));
    assert_eq!(
        nslab(tmp.path(), &["theory", "--profile", "snapshot:/does/not/exist.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        nslab(tmp.path(), &["theory", "--profile", "constant:1", "--nu-grid", "-1"]).status.code(),
        Some(1)
    );
}

#[test]
fn check_hodge_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nslab(tmp.path(), &["check", "--suite", "hodge"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("harmonic flux"));
}

#[test]
fn check_identities_reports_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nslab(tmp.path(), &["check", "--suite", "identities"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("strain identity")).unwrap().to_string();
    let ratio: f64 = line.split_whitespace().rev().nth(1).unwrap().parse().unwrap();
    assert!((3.4..=4.6).contains(&ratio), "{line}");
}

#[test]
fn check_oracle_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nslab(tmp.path(), &["check", "--suite", "oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nslab(tmp.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(nslab(tmp.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(nslab(tmp.path(), &["frobnicate"]).status.code(), Some(1));
}
