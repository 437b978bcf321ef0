//! Experiment harness: vanishing-viscosity and large-friction sweeps, energy
//! audits and log-log fits with bootstrap bands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::presets::{mollified_patch, pure_circulation, radial_bump, random_state, RadialProfile};
use crate::dynamics::{BCSpec, SimState, StepParams, Stepper, TimeSeries};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{build_domain, AnnulusDomain};
use crate::theory::{calibrate_r, osgood_rate, phi_from_initial_vorticity, VorticityProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPreset {
    /// `u = gamma e_theta / (2 pi r)`.
    PureCirculation { gamma: f64 },
    RadialBump { center: f64, half_width: f64, amplitude: f64 },
    /// Smoothed disc of uniform vorticity.
    Patch { rc: f64, thc: f64, radius: f64, amplitude: f64 },
    /// Band-limited random field with unit energy norm.
    Random { k_max: usize, m_max: usize, vanishing_on_walls: bool },
}

impl InitialPreset {
    pub fn build(&self, domain: Arc<AnnulusDomain>, seed: u64) -> SimState {
        match *self {
            InitialPreset::PureCirculation { gamma } => pure_circulation(domain, gamma),
            InitialPreset::RadialBump {
                center,
                half_width,
                amplitude,
            } => radial_bump(domain, center, half_width, amplitude),
            InitialPreset::Patch {
                rc,
                thc,
                radius,
                amplitude,
            } => mollified_patch(domain, rc, thc, radius, amplitude),
            InitialPreset::Random {
                k_max,
                m_max,
                vanishing_on_walls,
            } => {
                let profile = if vanishing_on_walls {
                    RadialProfile::SineSquared
                } else {
                    RadialProfile::Sine
                };
                random_state(domain, seed, k_max, m_max, profile)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    /// Viscosities; the reference is the Euler run. `0` runs as Euler.
    Nu(Vec<f64>),
    /// Uniform friction on both walls; the reference is the no-slip run.
    /// An infinite value runs as no-slip.
    Alpha(Vec<f64>),
}

impl SweepVariable {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepVariable::Nu(v) | SweepVariable::Alpha(v) => v,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SweepVariable::Nu(_) => "nu",
            SweepVariable::Alpha(_) => "alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub initial: InitialPreset,
    pub sweep: SweepVariable,
    /// Friction on both walls for viscosity sweeps.
    pub alpha: f64,
    /// Viscosity for friction sweeps.
    pub nu: f64,
    pub horizon: f64,
    pub dt: f64,
    pub cfl_max: f64,
    /// Spacing of the saved samples over which errors are maximised.
    pub sample_every: f64,
    /// Constant `C` in `phi(p) = C p ||omega0||_p + C ||u||_2` for the rate overlay.
    pub rate_c: f64,
    pub seed: u64,
    pub bootstrap: usize,
    pub jobs: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let v = self.sweep.values();
        if v.is_empty() {
            return Err(Error::InvalidArgument("sweep list is empty".into()));
        }
        if v.iter().any(|x| x.is_nan() || *x < 0.0) {
            return Err(Error::InvalidArgument("sweep values must be non-negative".into()));
        }
        let inc = v.windows(2).all(|w| w[1] > w[0]);
        let dec = v.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::InvalidArgument("sweep list must be strictly monotone".into()));
        }
        if let SweepVariable::Alpha(_) = self.sweep {
            if !(self.nu > 0.0) {
                return Err(Error::InvalidArgument("friction sweeps need positive viscosity".into()));
            }
        }
        if !(self.horizon > 0.0 && self.dt > 0.0 && self.sample_every > 0.0) {
            return Err(Error::InvalidArgument("horizon, dt and sample spacing must be positive".into()));
        }
        self.steps()?;
        self.steps_per_sample()?;
        if self.jobs == 0 {
            return Err(Error::InvalidArgument("jobs must be at least 1".into()));
        }
        Ok(())
    }

    fn ratio(a: f64, b: f64, what: &str) -> Result<usize> {
        let n = (a / b).round();
        if n < 1.0 || ((n * b) - a).abs() > 1e-9 * a {
            return Err(Error::InvalidArgument(format!(
                "{what}: {a} is not a whole multiple of {b}"
            )));
        }
        Ok(n as usize)
    }

    pub fn steps(&self) -> Result<usize> {
        Self::ratio(self.horizon, self.dt, "horizon")
    }

    pub fn steps_per_sample(&self) -> Result<usize> {
        Self::ratio(self.sample_every, self.dt, "sample spacing")
    }

    pub fn domain(&self) -> Result<Arc<AnnulusDomain>> {
        build_domain(self.r_inner, self.r_outer, self.n_r, self.n_theta)
    }

    fn params(&self) -> StepParams {
        StepParams {
            cfl_max: self.cfl_max,
            ..StepParams::new(self.dt)
        }
    }

    /// Boundary condition and viscosity of the run at sweep value `p`.
    pub fn run_setup(&self, domain: &AnnulusDomain, p: f64) -> (BCSpec, f64) {
        match self.sweep {
            SweepVariable::Nu(_) if p == 0.0 => (BCSpec::Euler, 0.0),
            SweepVariable::Nu(_) => (BCSpec::navier_constant(domain, self.alpha), p),
            SweepVariable::Alpha(_) if p.is_infinite() => (BCSpec::NoSlip, self.nu),
            SweepVariable::Alpha(_) => (BCSpec::navier_constant(domain, p), self.nu),
        }
    }

    pub fn reference_setup(&self) -> (BCSpec, f64) {
        match self.sweep {
            SweepVariable::Nu(_) => (BCSpec::Euler, 0.0),
            SweepVariable::Alpha(_) => (BCSpec::NoSlip, self.nu),
        }
    }
}

/// A finished run: per-step series plus velocity samples.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub series: TimeSeries,
    pub samples: Vec<VectorField>,
    /// `(int_0^T ||u||^2_{L2(Gamma)} dt)^(1/2)` by the trapezoid rule over steps.
    pub trace_budget: f64,
    pub final_state: SimState,
}

pub fn run_recorded(
    domain: Arc<AnnulusDomain>,
    initial: &SimState,
    bc: BCSpec,
    nu: f64,
    params: StepParams,
    steps: usize,
    steps_per_sample: usize,
) -> Result<RunRecord> {
    let stepper = Stepper::new(domain, bc, nu, params)?;
    let mut series = TimeSeries::new();
    let mut samples = Vec::new();
    let mut count = 0usize;
    let final_state = stepper.run(initial, steps, |s, u| {
        series.push(s, u);
        if count % steps_per_sample == 0 {
            samples.push(u.clone());
        }
        count += 1;
        Ok(())
    })?;
    let traces: Vec<f64> = series.rows.iter().map(|r| r.l2_gamma_trace.powi(2)).collect();
    let integral: f64 = traces.windows(2).map(|w| 0.5 * (w[0] + w[1]) * params.dt).sum();
    Ok(RunRecord {
        series,
        samples,
        trace_budget: integral.sqrt(),
        final_state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: f64,
    pub status: RowStatus,
    /// `sup_t ||u - u_ref||_{L2(Omega)}` over the samples.
    pub e_omega: f64,
    /// `sup_t ||u - u_ref||_{L2(Gamma)}` over the samples.
    pub e_gamma: f64,
    pub trace_budget: f64,
    /// `||u0||_2 (||gamma||_inf / nu)^(1/2)` for friction rows with `alpha > max kappa`.
    pub bound_rhs: Option<f64>,
    /// Calibrated rate `f(nu)` for viscosity rows.
    pub rate: Option<f64>,
    pub pass: Option<bool>,
    pub series: TimeSeries,
}

impl SweepRow {
    fn failed(param: f64, msg: String) -> Self {
        Self {
            param,
            status: RowStatus::Failed(msg),
            e_omega: f64::NAN,
            e_gamma: f64::NAN,
            trace_budget: f64::NAN,
            bound_rhs: None,
            rate: None,
            pass: None,
            series: TimeSeries::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% bootstrap band for the slope.
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFit {
    pub label: String,
    pub fit: Option<LogLogFit>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateOverlay {
    pub r: f64,
    pub profile: VorticityProfile,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kind: &'static str,
    pub rows: Vec<SweepRow>,
    pub reference: TimeSeries,
    pub slopes: Vec<NamedFit>,
    pub overlay: Option<RateOverlay>,
    pub notes: Vec<String>,
}

fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Least squares on `(ln x, ln y)` with a pairs bootstrap of `resamples` draws.
pub fn fit_loglog(x: &[f64], y: &[f64], resamples: usize, seed: u64) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("fit inputs differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs at least 3 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept) =
        least_squares(&lx, &ly).ok_or_else(|| Error::InvalidArgument("fit abscissae coincide".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lx.len();
    let mut slopes = Vec::with_capacity(resamples);
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..resamples {
        for i in 0..n {
            let k = rng.gen_range(0..n);
            bx[i] = lx[k];
            by[i] = ly[k];
        }
        if let Some((s, _)) = least_squares(&bx, &by) {
            slopes.push(s);
        }
    }
    let band = if slopes.is_empty() {
        (slope, slope)
    } else {
        slopes.sort_by(f64::total_cmp);
        let q = |f: f64| slopes[((slopes.len() - 1) as f64 * f).round() as usize];
        (q(0.025), q(0.975))
    };
    Ok(LogLogFit {
        slope,
        intercept,
        band,
    })
}

fn named_fit(label: &str, x: &[f64], y: &[f64], cfg: &SweepConfig) -> NamedFit {
    let (x, y): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    NamedFit {
        label: label.to_string(),
        fit: fit_loglog(&x, &y, cfg.bootstrap, cfg.seed).ok(),
        points: x.len(),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

struct Prepared {
    domain: Arc<AnnulusDomain>,
    initial: SimState,
    reference: RunRecord,
    steps: usize,
    per_sample: usize,
}

fn prepare(cfg: &SweepConfig) -> Result<Prepared> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let initial = cfg.initial.build(domain.clone(), cfg.seed);
    let steps = cfg.steps()?;
    let per_sample = cfg.steps_per_sample()?;
    let (bc, nu) = cfg.reference_setup();
    let reference = run_recorded(domain.clone(), &initial, bc, nu, cfg.params(), steps, per_sample)?;
    Ok(Prepared {
        domain,
        initial,
        reference,
        steps,
        per_sample,
    })
}

fn measure_row(cfg: &SweepConfig, prep: &Prepared, p: f64) -> SweepRow {
    let (bc, nu) = cfg.run_setup(&prep.domain, p);
    let rec = match run_recorded(
        prep.domain.clone(),
        &prep.initial,
        bc,
        nu,
        cfg.params(),
        prep.steps,
        prep.per_sample,
    ) {
        Ok(r) => r,
        Err(e) => return SweepRow::failed(p, e.to_string()),
    };
    let mut e_omega = 0.0f64;
    let mut e_gamma = 0.0f64;
    for (u, v) in rec.samples.iter().zip(&prep.reference.samples) {
        match u.sub(v) {
            Ok(w) => {
                e_omega = e_omega.max(w.l2());
                e_gamma = e_gamma.max(w.boundary_l2());
            }
            Err(e) => return SweepRow::failed(p, e.to_string()),
        }
    }
    SweepRow {
        param: p,
        status: RowStatus::Ok,
        e_omega,
        e_gamma,
        trace_budget: rec.trace_budget,
        bound_rhs: None,
        rate: None,
        pass: None,
        series: rec.series,
    }
}

fn run_rows(cfg: &SweepConfig, prep: &Prepared) -> Result<Vec<SweepRow>> {
    let values = cfg.sweep.values().to_vec();
    let rows = pool(cfg.jobs)?.install(|| {
        values
            .par_iter()
            .map(|&p| measure_row(cfg, prep, p))
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

/// Yudovich profile of the initial data: `phi` from the `L^p` norms of
/// `omega0` and `M = (2 sup |u0|)^2`, the initial maximum standing in for
/// `sup |u_nu - u_bar|`.
pub fn initial_profile(omega0: &ScalarField, u0: &VectorField, rate_c: f64) -> Result<VorticityProfile> {
    let u_inf = u0
        .u_r()
        .iter()
        .zip(u0.u_theta())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let m = (2.0 * u_inf).powi(2).max(f64::MIN_POSITIVE);
    phi_from_initial_vorticity(omega0, u0.l2(), rate_c)?.with_m(m)
}

/// Viscosity sweep against the Euler reference, with the Osgood rate
/// calibrated at the largest viscosity and compared out of sample.
pub fn sweep_viscosity(cfg: &SweepConfig) -> Result<SweepReport> {
    if !matches!(cfg.sweep, SweepVariable::Nu(_)) {
        return Err(Error::InvalidArgument("sweep_viscosity needs a viscosity list".into()));
    }
    let prep = prepare(cfg)?;
    let mut rows = run_rows(cfg, &prep)?;

    let profile = initial_profile(&prep.initial.omega, &prep.reference.samples[0], cfg.rate_c)?;
    let anchor = rows
        .iter()
        .filter(|r| r.is_ok() && r.param > 0.0 && r.e_omega > 0.0)
        .max_by(|a, b| a.param.total_cmp(&b.param))
        .map(|r| (r.param, r.e_omega));
    let mut notes = Vec::new();
    let overlay = match anchor {
        Some((nu_a, e_a)) if !profile.degenerate => match calibrate_r(nu_a, e_a, cfg.horizon, &profile) {
            Ok(r) => {
                for row in rows.iter_mut().filter(|r| r.is_ok() && r.param > 0.0) {
                    let f = osgood_rate(row.param, r, cfg.horizon, &profile)?;
                    row.rate = Some(f);
                    // the anchor passes by construction
                    row.pass = Some(row.param == nu_a || row.e_omega <= f);
                }
                Some(RateOverlay { r, profile })
            }
            Err(e) => {
                notes.push(format!("rate overlay: R not calibrated ({e})"));
                None
            }
        },
        _ => {
            notes.push("rate overlay: no usable anchor row".to_string());
            None
        }
    };

    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let nus: Vec<f64> = ok.iter().map(|r| r.param).collect();
    let eo: Vec<f64> = ok.iter().map(|r| r.e_omega).collect();
    let eg: Vec<f64> = ok.iter().map(|r| r.e_gamma).collect();
    let slopes = vec![
        named_fit("E_omega vs nu", &nus, &eo, cfg),
        named_fit("E_gamma vs nu", &nus, &eg, cfg),
        named_fit("E_gamma vs E_omega", &eo, &eg, cfg),
    ];
    Ok(SweepReport {
        kind: "nu",
        rows,
        reference: prep.reference.series,
        slopes,
        overlay,
        notes,
    })
}

/// Friction sweep against the no-slip reference, with the boundary budget
/// `||u||_{L2(0,T; L2(Gamma))} <= ||u0||_2 (||1/alpha||_inf / nu)^(1/2)` checked
/// on every row whose friction exceeds the largest wall curvature.
pub fn sweep_alpha(cfg: &SweepConfig) -> Result<SweepReport> {
    if !matches!(cfg.sweep, SweepVariable::Alpha(_)) {
        return Err(Error::InvalidArgument("sweep_alpha needs a friction list".into()));
    }
    let prep = prepare(cfg)?;
    let mut rows = run_rows(cfg, &prep)?;
    let u0_l2 = prep.reference.samples[0].l2();
    let kappa_max = prep
        .domain
        .components()
        .iter()
        .map(|c| c.curvature)
        .fold(f64::MIN, f64::max);
    for row in rows.iter_mut().filter(|r| r.is_ok()) {
        if row.param > kappa_max && row.param.is_finite() {
            let rhs = u0_l2 * (1.0 / (row.param * cfg.nu)).sqrt();
            row.bound_rhs = Some(rhs);
            row.pass = Some(row.trace_budget <= rhs);
        }
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let alphas: Vec<f64> = ok.iter().map(|r| r.param).collect();
    let eo: Vec<f64> = ok.iter().map(|r| r.e_omega).collect();
    let eg: Vec<f64> = ok.iter().map(|r| r.e_gamma).collect();
    let budget: Vec<f64> = ok.iter().map(|r| r.trace_budget).collect();
    let slopes = vec![
        named_fit("E_omega vs alpha", &alphas, &eo, cfg),
        named_fit("E_gamma vs alpha", &alphas, &eg, cfg),
        named_fit("trace_budget vs alpha", &alphas, &budget, cfg),
    ];
    Ok(SweepReport {
        kind: "alpha",
        rows,
        reference: prep.reference.series,
        slopes,
        overlay: None,
        notes: Vec::new(),
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn slope(&self, label: &str) -> Option<&LogLogFit> {
        self.slopes.iter().find(|s| s.label == label)?.fit.as_ref()
    }

    /// `param,E_omega,E_gamma,trace_budget,bound_rhs,pass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "param,E_omega,E_gamma,trace_budget,bound_rhs,pass")?;
        for r in &self.rows {
            let pass = match (&r.status, r.pass) {
                (RowStatus::Failed(_), _) => "failed",
                (_, Some(true)) => "true",
                (_, Some(false)) => "false",
                (_, None) => "na",
            };
            let rhs = r.bound_rhs.or(r.rate).unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt(r.param),
                fmt(r.e_omega),
                fmt(r.e_gamma),
                fmt(r.trace_budget),
                fmt(rhs),
                pass
            )?;
        }
        Ok(())
    }

    pub fn write_slopes<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.slopes {
            match &s.fit {
                Some(f) => writeln!(
                    w,
                    "{}: slope = {}, intercept = {}, band95 = [{}, {}], points = {}",
                    s.label,
                    fmt(f.slope),
                    fmt(f.intercept),
                    fmt(f.band.0),
                    fmt(f.band.1),
                    s.points
                )?,
                None => writeln!(w, "{}: slope undefined, points = {}", s.label, s.points)?,
            }
        }
        if let Some(o) = &self.overlay {
            writeln!(w, "rate overlay: R = {}, M = {}", fmt(o.r), fmt(o.profile.m))?;
        }
        for n in &self.notes {
            writeln!(w, "{n}")?;
        }
        for r in &self.rows {
            if let RowStatus::Failed(msg) = &r.status {
                writeln!(w, "row {} failed: {msg}", fmt(r.param))?;
            }
        }
        Ok(())
    }

    /// Writes `report.csv`, `slopes.txt` and one series CSV per run into
    /// `dir`; returns the paths relative to `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir.join("series"))?;
        let mut written = Vec::new();
        let mut put = |name: PathBuf, bytes: Vec<u8>| -> Result<()> {
            fs::write(dir.join(&name), bytes)?;
            written.push(name);
            Ok(())
        };
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        put("report.csv".into(), buf)?;
        let mut buf = Vec::new();
        self.write_slopes(&mut buf)?;
        put("slopes.txt".into(), buf)?;
        let mut buf = Vec::new();
        self.reference.write_csv(&mut buf)?;
        put(Path::new("series").join("reference.csv"), buf)?;
        for (i, r) in self.rows.iter().enumerate() {
            if r.is_ok() {
                let mut buf = Vec::new();
                r.series.write_csv(&mut buf)?;
                put(Path::new("series").join(format!("row_{i:02}.csv")), buf)?;
            }
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuditMode {
    /// Energy non-increasing step by step (friction non-negative).
    Monotone,
    /// `||u(t)|| <= e^(C nu t) ||u0||` with `C = sup |kappa - alpha|`.
    Envelope { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    pub mode: AuditMode,
    /// Largest relative step increase (monotone) or largest
    /// `||u(t)|| / (e^(C nu t) ||u0||) - 1` (envelope).
    pub worst: f64,
    pub violations: usize,
    pub steps: usize,
}

impl EnergyAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst <= tol
    }
}

/// Audits a run's energy series against the energy inequality.
pub fn audit_energy(series: &TimeSeries, bc: &BCSpec, nu: f64, domain: &AnnulusDomain) -> Result<EnergyAudit> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("energy audit needs at least two samples".into()));
    }
    let friction = bc.friction(domain)?;
    let mode = match &friction {
        Some(alpha) if alpha.iter().flatten().any(|a| *a < 0.0) => {
            let mut c = 0.0f64;
            for (comp, a) in domain.components().iter().zip(alpha) {
                for v in a {
                    c = c.max((comp.curvature - v).abs());
                }
            }
            AuditMode::Envelope { c }
        }
        _ => AuditMode::Monotone,
    };
    let rows = &series.rows;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    match mode {
        AuditMode::Monotone => {
            for w in rows.windows(2) {
                let rel = (w[1].energy - w[0].energy) / w[0].energy.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                if rel > 0.0 {
                    violations += 1;
                }
            }
        }
        AuditMode::Envelope { c } => {
            let (t0, e0) = (rows[0].t, rows[0].energy);
            for r in &rows[1..] {
                let env = e0 * (c * nu * (r.t - t0)).exp();
                let excess = r.energy / env - 1.0;
                worst = worst.max(excess);
                if excess > 0.0 {
                    violations += 1;
                }
            }
        }
    }
    Ok(EnergyAudit {
        mode,
        worst,
        violations,
        steps: rows.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(sweep: SweepVariable) -> SweepConfig {
        SweepConfig {
            r_inner: 1.0,
            r_outer: 2.0,
            n_r: 24,
            n_theta: 32,
            initial: InitialPreset::Random {
                k_max: 2,
                m_max: 2,
                vanishing_on_walls: true,
            },
            sweep,
            alpha: 1.0,
            nu: 0.05,
            horizon: 0.05,
            dt: 0.005,
            cfl_max: 0.5,
            sample_every: 0.01,
            rate_c: 1.0,
            seed: 3,
            bootstrap: 50,
            jobs: 1,
        }
    }

    #[test]
    fn exact_power_fit() {
        let x: Vec<f64> = (0..5).map(|i| 10f64.powi(-i)).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        let f = fit_loglog(&x, &y, 200, 1).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.band.0 - 0.5).abs() < 1e-12 && (f.band.1 - 0.5).abs() < 1e-12);
        assert!(fit_loglog(&x[..2], &y[..2], 10, 1).is_err());
        assert!(fit_loglog(&[1.0, 2.0, 0.0], &[1.0, 1.0, 1.0], 10, 1).is_err());
    }

    #[test]
    fn noisy_power_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..8).map(|i| 10f64.powf(-0.5 * i as f64)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v.powf(0.3) * (1.0 + rng.gen_range(-0.017..0.017))).collect();
        let f = fit_loglog(&x, &y, 200, 1).unwrap();
        assert!((f.slope - 0.3).abs() < 0.05);
        assert!(f.band.0 <= f.slope && f.slope <= f.band.1);
    }

    #[test]
    fn reference_row_has_zero_error() {
        let cfg = small_cfg(SweepVariable::Nu(vec![0.0, 0.01, 0.02]));
        let rep = sweep_viscosity(&cfg).unwrap();
        assert_eq!(rep.rows[0].e_omega, 0.0);
        assert!(rep.rows[1].e_omega > 0.0);
        let cfg = small_cfg(SweepVariable::Alpha(vec![10.0, 100.0, f64::INFINITY]));
        let rep = sweep_alpha(&cfg).unwrap();
        assert!(rep.rows[2].e_omega <= 1e-12);
    }

    #[test]
    fn single_point_sweep_has_undefined_slope() {
        let cfg = small_cfg(SweepVariable::Nu(vec![0.01]));
        let rep = sweep_viscosity(&cfg).unwrap();
        assert!(rep.slopes.iter().all(|s| s.fit.is_none()));
        let mut out = Vec::new();
        rep.write_slopes(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("undefined"));
    }

    #[test]
    fn reports_are_reproducible_across_jobs() {
        let mut cfg = small_cfg(SweepVariable::Alpha(vec![10.0, 30.0, 100.0]));
        let csv = |cfg: &SweepConfig| {
            let mut out = Vec::new();
            sweep_alpha(cfg).unwrap().write_csv(&mut out).unwrap();
            out
        };
        let a = csv(&cfg);
        cfg.jobs = 3;
        assert_eq!(a, csv(&cfg));
    }

    #[test]
    fn reference_failure_aborts_the_sweep() {
        let mut cfg = small_cfg(SweepVariable::Nu(vec![0.01, 0.02, 0.03]));
        cfg.initial = InitialPreset::PureCirculation { gamma: 2000.0 };
        assert!(matches!(sweep_viscosity(&cfg), Err(Error::Cfl(_))));
    }

    #[test]
    fn failed_rows_are_marked() {
        let cfg = small_cfg(SweepVariable::Nu(vec![0.01]));
        let mut rep = sweep_viscosity(&cfg).unwrap();
        rep.rows.push(SweepRow::failed(0.02, "CFL violation: test".into()));
        assert_eq!(rep.failed_rows(), 1);
        let mut out = Vec::new();
        rep.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().lines().last().unwrap().ends_with(",failed"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(SweepVariable::Nu(vec![0.01, 0.01]));
        assert!(cfg.validate().is_err());
        cfg.sweep = SweepVariable::Nu(vec![0.01, 0.02]);
        cfg.sample_every = 0.0123;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn audit_modes() {
        let d = build_domain(1.0, 2.0, 16, 16).unwrap();
        assert!(audit_energy(&TimeSeries::new(), &BCSpec::Lions, 0.1, &d).is_err());
        let s = pure_circulation(d.clone(), 1.0);
        let u = crate::dynamics::reconstruct_velocity(&s).unwrap();
        let mut series = TimeSeries::new();
        for i in 0..3 {
            let mut st = s.clone();
            st.t = i as f64 * 0.1;
            series.push(&st, &u);
        }
        let a = audit_energy(&series, &BCSpec::Lions, 0.1, &d).unwrap();
        assert_eq!(a.mode, AuditMode::Envelope { c: 1.0 });
        assert!(a.worst < 0.0);
        let m = audit_energy(&series, &BCSpec::navier_constant(&d, 1.0), 0.1, &d).unwrap();
        assert_eq!(m.mode, AuditMode::Monotone);
        assert_eq!(m.violations, 0);
    }
}
