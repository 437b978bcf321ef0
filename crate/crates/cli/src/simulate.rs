use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nslab::dynamics::{energy, Stepper, TimeSeries};
use nslab::VectorField;

use crate::config::RunConfig;
use crate::output::{output_root, RunDir};
use crate::{core_error, CliError};

/// Name of the run directory: `[output] name` or the config file stem.
pub fn run_name(cfg: &RunConfig, path: &Path, suffix: &str) -> String {
    let base = cfg.output.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    });
    format!("{base}{suffix}")
}

struct LevelSummary {
    label: String,
    steps: usize,
    t_final: f64,
    energy: (f64, f64),
    drift: f64,
    circulation: (f64, f64),
}

fn simulate_level(
    cfg: &RunConfig,
    n_r: usize,
    n_theta: usize,
    prefix: &Path,
    out: &mut RunDir,
) -> Result<LevelSummary, CliError> {
    let (steps, every) = cfg.schedule()?;
    let domain = cfg.build_domain(n_r, n_theta)?;
    let initial = cfg.initial_preset().build(domain.clone(), cfg.run.seed);
    let stepper = Stepper::new(domain.clone(), cfg.bc(&domain), cfg.nu(), cfg.step_params()).map_err(core_error)?;

    let mut series = TimeSeries::new();
    let mut snapshots: Vec<(usize, Vec<u8>, Vec<u8>)> = Vec::new();
    let mut u_first: Option<VectorField> = None;
    let mut count = 0usize;
    let mut take = |s: &nslab::dynamics::SimState, u: &VectorField| -> nslab::Result<()> {
        series.push(s, u);
        if u_first.is_none() {
            u_first = Some(u.clone());
        }
        if count % every == 0 || count == steps {
            let mut w = Vec::new();
            s.omega.write_csv(&mut w)?;
            let mut v = Vec::new();
            u.write_csv(&mut v)?;
            snapshots.push((count, w, v));
        }
        count += 1;
        Ok(())
    };
    let last = stepper.run(&initial, steps, &mut take).map_err(core_error)?;

    let u0 = u_first.expect("run observes the initial state");
    let u_t = stepper.velocity(&last).map_err(core_error)?;
    let norm0 = u0.l2();
    let drift = if norm0 > 0.0 {
        u_t.sub(&u0).map_err(core_error)?.l2() / norm0
    } else {
        u_t.l2()
    };

    let mut buf = Vec::new();
    series.write_csv(&mut buf).map_err(core_error)?;
    out.write(prefix.join("series.csv"), &buf)?;
    for (step, w, v) in &snapshots {
        out.write(prefix.join("snapshots").join(format!("omega_{step:06}.csv")), w)?;
        out.write(prefix.join("snapshots").join(format!("velocity_{step:06}.csv")), v)?;
    }
    Ok(LevelSummary {
        label: format!("{n_r}x{n_theta}"),
        steps,
        t_final: last.t,
        energy: (norm0, energy(&last).map_err(core_error)?),
        drift,
        circulation: (initial.circulation_inner, last.circulation_inner),
    })
}

pub fn run(config_path: &Path) -> Result<PathBuf, CliError> {
    let cfg = RunConfig::load(config_path)?;
    cfg.schedule()?;
    for (n_r, n_theta) in cfg.resolutions() {
        cfg.build_domain(n_r, n_theta)?;
    }
    let normalized = cfg.to_toml();
    let root = output_root(&cfg.output.root).join(run_name(&cfg, config_path, ""));
    let mut out = RunDir::create(root)?;
    out.write("config.toml", normalized.as_bytes())?;

    let levels = cfg.resolutions();
    let mut text = String::new();
    let mut summary = Vec::new();
    for (i, &(n_r, n_theta)) in levels.iter().enumerate() {
        let prefix = if i == 0 {
            PathBuf::new()
        } else {
            PathBuf::from(format!("level_{n_r}x{n_theta}"))
        };
        let s = simulate_level(&cfg, n_r, n_theta, &prefix, &mut out)?;
        let _ = writeln!(text, "grid {}: {} steps to t = {:.6}", s.label, s.steps, s.t_final);
        let _ = writeln!(text, "  energy {:.16e} -> {:.16e}", s.energy.0, s.energy.1);
        let _ = writeln!(
            text,
            "  circulation {:.16e} -> {:.16e}",
            s.circulation.0, s.circulation.1
        );
        let _ = writeln!(text, "  final-state drift {:.6e}", s.drift);
        summary.push((format!("drift_{}", s.label), format!("{:.16e}", s.drift)));
        summary.push((format!("energy_final_{}", s.label), format!("{:.16e}", s.energy.1)));
    }
    out.write("summary.txt", text.as_bytes())?;
    print!("{text}");
    out.finish("simulate", &normalized, cfg.run.seed, &summary)
}
