use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nslab::dynamics::{reconstruct_velocity, SimState};
use nslab::lab::initial_profile;
use nslab::theory::{admissibility, rate_curve, GrowthFunction, VorticityProfile};
use nslab::{build_domain, ScalarField};

use crate::output::{output_root, RunDir};
use crate::{core_error, CliError};

pub struct TheoryArgs {
    pub profile: String,
    pub m: Option<f64>,
    pub nu_grid: Vec<f64>,
    pub r: f64,
    pub t: f64,
    pub rate_c: f64,
    pub circulation: f64,
}

enum Source {
    Catalog(GrowthFunction),
    Snapshot(PathBuf),
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: cannot parse {s:?} as a number")))
}

fn parse_profile(spec: &str) -> Result<Source, CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let coeff = |i: usize| -> Result<f64, CliError> {
        args.get(i)
            .map(|s| number(s, "profile"))
            .unwrap_or(Ok(1.0))
    };
    match kind {
        "constant" => Ok(Source::Catalog(GrowthFunction::Constant(coeff(0)?))),
        "log" => Ok(Source::Catalog(GrowthFunction::Log(coeff(0)?))),
        "power" => Ok(Source::Catalog(GrowthFunction::Power {
            c: coeff(0)?,
            gamma: args
                .get(1)
                .map(|s| number(s, "power exponent"))
                .unwrap_or(Ok(0.5))?,
        })),
        "snapshot" if !rest.is_empty() => Ok(Source::Snapshot(PathBuf::from(rest))),
        _ => Err(CliError::Config(format!(
            "unknown profile {spec:?}; expected constant[:C], log[:C], power[:C[:gamma]] or snapshot:PATH"
        ))),
    }
}

/// Reads an `r,theta,value` vorticity snapshot written by `simulate`.
pub fn read_snapshot(path: &Path) -> Result<ScalarField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |msg: &str| CliError::Config(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("r,theta,value") {
        return Err(bad("expected header r,theta,value"));
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad("rows need three columns"));
        }
        let parsed: Vec<f64> = cols.iter().map(|c| number(c, "snapshot")).collect::<Result<_, _>>()?;
        rows.push((parsed[0], parsed[1], parsed[2]));
    }
    if rows.is_empty() {
        return Err(bad("no rows"));
    }
    let n_theta = rows.iter().take_while(|r| r.0 == rows[0].0).count();
    if n_theta == 0 || rows.len() % n_theta != 0 {
        return Err(bad("rows do not form a radius-major grid"));
    }
    let n_r = rows.len() / n_theta;
    let (a, b) = (rows[0].0, rows[rows.len() - 1].0);
    let domain = build_domain(a, b, n_r, n_theta).map_err(|e| bad(&e.to_string()))?;
    for (i, row) in rows.iter().enumerate() {
        let (j, k) = (i / n_theta, i % n_theta);
        let h = domain.dr.max(domain.dtheta);
        if (row.0 - domain.radii[j]).abs() > 1e-9 * h || (row.1 - domain.thetas[k]).abs() > 1e-9 * h {
            return Err(bad("coordinates do not match a uniform polar grid"));
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (dr, dtheta) = (domain.dr, domain.dtheta);
    Ok(ScalarField::from_fn(domain, |r, t| {
        let j = ((r - a) / dr).round() as usize;
        let k = (t / dtheta).round() as usize;
        values[j * n_theta + k]
    }))
}

pub fn run(args: &TheoryArgs) -> Result<PathBuf, CliError> {
    if args.nu_grid.is_empty() || args.nu_grid.iter().any(|nu| !(*nu > 0.0)) {
        return Err(CliError::Config("nu grid must hold positive viscosities".into()));
    }
    let source = parse_profile(&args.profile)?;
    let (profile, growth, label) = match source {
        Source::Catalog(g) => {
            let m = args.m.unwrap_or(1.0);
            let p = VorticityProfile::from_growth(m, g.clone()).map_err(|e| CliError::Config(e.to_string()))?;
            (p, g, args.profile.clone())
        }
        Source::Snapshot(path) => {
            let omega = read_snapshot(&path)?;
            let state = SimState::new(omega, args.circulation);
            let u = reconstruct_velocity(&state).map_err(core_error)?;
            let mut p = initial_profile(&state.omega, &u, args.rate_c).map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(m) = args.m {
                p = p.with_m(m).map_err(|e| CliError::Config(e.to_string()))?;
            }
            let table = p.table().expect("snapshot profiles are tabulated");
            let theta: Vec<(f64, f64)> = table.iter().map(|&(q, phi)| (q, phi / q)).collect();
            let g = GrowthFunction::tabulated(theta).map_err(|e| CliError::Config(e.to_string()))?;
            (p, g, "snapshot".to_string())
        }
    };

    let report = admissibility(&growth, profile.m).map_err(core_error)?;
    let curve = rate_curve(&args.nu_grid, args.r, args.t, &profile).map_err(core_error)?;

    let mut text = String::new();
    let _ = writeln!(text, "profile {label}, M = {:.6e}", profile.m);
    let _ = writeln!(text, "admissibility: {}", report.verdict.as_str());
    for (delta, integral) in &report.estimates {
        let _ = writeln!(text, "  int_{delta:.0e}^1 ds/beta = {integral:.6e}");
    }
    if let Some(trend) = report.trend {
        let _ = writeln!(text, "  increment trend {trend:.6e}");
    }
    for (nu, f, closed) in &curve.samples {
        let _ = writeln!(text, "  f({nu:.3e}) = {f:.10e}  closed form {closed:.10e}");
    }
    print!("{text}");

    let dir_name: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    let mut out = RunDir::create(output_root("nslab_out").join(format!("theory_{dir_name}")))?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv, &profile, &label).map_err(core_error)?;
    out.write("rate.csv", &csv)?;
    out.write("verdict.txt", text.as_bytes())?;
    let invocation = format!(
        "profile={} m={:?} nu={:?} r={} t={} rate_c={} circulation={}",
        args.profile, args.m, args.nu_grid, args.r, args.t, args.rate_c, args.circulation
    );
    let summary = vec![("verdict".to_string(), report.verdict.as_str().to_string())];
    out.finish("theory", &invocation, 0, &summary)
}
