use std::path::{Path, PathBuf};

use nslab::lab::{sweep_alpha, sweep_viscosity};

use crate::config::{RunConfig, SweepKind};
use crate::output::{output_root, RunDir};
use crate::simulate::run_name;
use crate::{core_error, CliError};

/// Runs the sweep and writes its report; returns the run directory and the
/// number of failed rows.
pub fn run(config_path: &Path, kind: SweepKind, jobs: usize) -> Result<(PathBuf, usize), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let sweep = cfg.sweep_config(kind, jobs)?;
    let label = match kind {
        SweepKind::Nu => "nu",
        SweepKind::Alpha => "alpha",
    };
    let normalized = cfg.to_toml();
    let root = output_root(&cfg.output.root).join(run_name(&cfg, config_path, &format!("_sweep_{label}")));

    let report = match kind {
        SweepKind::Nu => sweep_viscosity(&sweep),
        SweepKind::Alpha => sweep_alpha(&sweep),
    }
    .map_err(core_error)?;

    let mut out = RunDir::create(root)?;
    out.write("config.toml", normalized.as_bytes())?;
    let written = report.write_artifacts(out.path()).map_err(core_error)?;
    out.adopt(Path::new(""), &written);

    let mut slopes = Vec::new();
    report.write_slopes(&mut slopes).map_err(core_error)?;
    print!("{}", String::from_utf8_lossy(&slopes));
    let failed = report.failed_rows();
    println!("{} rows, {failed} failed", report.rows.len());
    let summary = vec![
        ("kind".to_string(), label.to_string()),
        ("rows".to_string(), report.rows.len().to_string()),
        ("failed_rows".to_string(), failed.to_string()),
    ];
    let dir = out.finish(&format!("sweep --kind {label}"), &normalized, cfg.run.seed, &summary)?;
    Ok((dir, failed))
}
