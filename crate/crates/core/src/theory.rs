//! Yudovich growth functions, the modulus
//! `beta(x) = inf_{0 < eps < 1} M^eps x^(1 - eps) phi(1 / eps)` and the
//! Osgood rate `f(nu)` defined by `int_{R nu}^{f(nu)} dr / beta(r) = T`.

use std::f64::consts::E;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::numerics::{brent, dormand_prince, golden_section, integrate};

/// Growth `theta(p)`; `phi(p) = p theta(p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthFunction {
    Constant(f64),
    /// `C (1 + ln p)`.
    Log(f64),
    /// `C p^gamma`.
    Power { c: f64, gamma: f64 },
    /// Samples `(p, theta(p))` with increasing `p`, linearly interpolated.
    Tabulated(Vec<(f64, f64)>),
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let n = table.len();
    if n == 1 {
        return table[0].1;
    }
    let i = match table.iter().position(|&(p, _)| p >= x) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => n - 2,
    };
    let (x0, y0) = table[i];
    let (x1, y1) = table[i + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn check_table(table: &[(f64, f64)]) -> Result<()> {
    if table.is_empty() {
        return Err(Error::InvalidArgument("empty table".into()));
    }
    if table.iter().any(|(p, v)| !p.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidArgument("table has non-finite entries".into()));
    }
    if table.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("table abscissae must increase".into()));
    }
    Ok(())
}

impl GrowthFunction {
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        check_table(&samples)?;
        Ok(GrowthFunction::Tabulated(samples))
    }

    pub fn theta(&self, p: f64) -> f64 {
        match self {
            GrowthFunction::Constant(c) => *c,
            GrowthFunction::Log(c) => c * (1.0 + p.ln()),
            GrowthFunction::Power { c, gamma } => c * p.powf(*gamma),
            GrowthFunction::Tabulated(t) => interpolate(t, p).max(0.0),
        }
    }

    pub fn phi(&self, p: f64) -> f64 {
        p * self.theta(p)
    }

    pub fn is_catalog(&self) -> bool {
        !matches!(self, GrowthFunction::Tabulated(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PhiSource {
    Growth(GrowthFunction),
    /// `(p, phi(p))` nodes, linear in `p = 1 / eps`.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityProfile {
    pub m: f64,
    phi: PhiSource,
    /// Set when `phi` vanishes identically.
    pub degenerate: bool,
}

impl VorticityProfile {
    pub fn from_growth(m: f64, growth: GrowthFunction) -> Result<Self> {
        check_m(m)?;
        if let GrowthFunction::Tabulated(t) = &growth {
            check_table(t)?;
        }
        let degenerate = match &growth {
            GrowthFunction::Constant(c) | GrowthFunction::Log(c) => *c == 0.0,
            GrowthFunction::Power { c, .. } => *c == 0.0,
            GrowthFunction::Tabulated(t) => t.iter().all(|x| x.1 == 0.0),
        };
        Ok(Self {
            m,
            phi: PhiSource::Growth(growth),
            degenerate,
        })
    }

    /// Profile with `phi` given directly at increasing `p` nodes.
    pub fn from_phi_table(m: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        check_m(m)?;
        check_table(&table)?;
        let degenerate = table.iter().all(|x| x.1 == 0.0);
        Ok(Self {
            m,
            phi: PhiSource::Table(table),
            degenerate,
        })
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        check_m(m)?;
        self.m = m;
        Ok(self)
    }

    pub fn phi(&self, p: f64) -> f64 {
        match &self.phi {
            PhiSource::Growth(g) => g.phi(p),
            PhiSource::Table(t) => interpolate(t, p).max(0.0),
        }
    }

    pub fn growth(&self) -> Option<&GrowthFunction> {
        match &self.phi {
            PhiSource::Growth(g) => Some(g),
            PhiSource::Table(_) => None,
        }
    }

    /// True where `phi(p)` is extrapolated from tabulated nodes.
    pub fn extrapolated(&self, p: f64) -> bool {
        let table = match &self.phi {
            PhiSource::Growth(GrowthFunction::Tabulated(t)) | PhiSource::Table(t) => t,
            PhiSource::Growth(_) => return false,
        };
        p < table[0].0 || p > table[table.len() - 1].0
    }

    /// `(p, phi(p))` nodes of a tabulated profile.
    pub fn table(&self) -> Option<&[(f64, f64)]> {
        match &self.phi {
            PhiSource::Table(t) => Some(t),
            PhiSource::Growth(_) => None,
        }
    }
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("M = {m} must be positive")));
    }
    Ok(())
}

fn beta_eps_unchecked(x: f64, eps: f64, profile: &VorticityProfile) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // M^eps x^(1 - eps) in logs to avoid underflow for tiny x
    (eps * profile.m.ln() + (1.0 - eps) * x.ln()).exp() * profile.phi(1.0 / eps)
}

/// `M^eps x^(1 - eps) phi(1 / eps)`.
pub fn beta_eps(x: f64, eps: f64, profile: &VorticityProfile) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("x = {x} must be non-negative")));
    }
    Ok(beta_eps_unchecked(x, eps, profile))
}

const EPS_MIN: f64 = 1e-4;
const SCAN_POINTS: usize = 128;

/// Infimum of [`beta_eps`] over `eps`: a log-spaced scan of `[1e-4, 1]`
/// refined by golden section around the best node. The value at `eps = 1`
/// is the limit from inside the interval.
pub fn beta(x: f64, profile: &VorticityProfile) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lo = EPS_MIN.ln();
    let step = -lo / (SCAN_POINTS - 1) as f64;
    let node = |i: usize| (lo + step * i as f64).exp().min(1.0);
    let g = |le: f64| beta_eps_unchecked(x, le.exp().min(1.0), profile);
    let (best, best_val) = (0..SCAN_POINTS)
        .map(|i| (i, beta_eps_unchecked(x, node(i), profile)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(0.0);
    let (_, refined) = golden_section(g, a, b, 1e-10);
    refined.min(best_val)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Admissible => "admissible",
            Verdict::NotAdmissible => "not_admissible",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    /// `(delta, int_delta^1 ds / beta(s))`.
    pub estimates: Vec<(f64, f64)>,
    /// Ratio of the last increment to the first, for tabulated input.
    pub trend: Option<f64>,
}

pub const ADMISSIBILITY_DELTAS: [f64; 3] = [1e-2, 1e-4, 1e-8];

/// `int_delta^1 ds / beta(s)`, computed in `ln s`.
pub fn inverse_beta_integral(delta: f64, profile: &VorticityProfile) -> Result<f64> {
    integrate(
        |y| {
            let s = y.exp();
            s / beta(s, profile)
        },
        delta.ln(),
        0.0,
        1e-8,
        1e-12,
    )
}

/// Analytic verdicts for catalog growth functions; tabulated input gets
/// `Unknown` with the three integral estimates and their trend.
pub fn admissibility(g: &GrowthFunction, m: f64) -> Result<AdmissibilityReport> {
    let profile = VorticityProfile::from_growth(m, g.clone())?;
    let verdict = match g {
        GrowthFunction::Constant(_) | GrowthFunction::Log(_) => Verdict::Admissible,
        GrowthFunction::Power { gamma, .. } if *gamma > 0.0 => Verdict::NotAdmissible,
        GrowthFunction::Power { .. } => Verdict::Admissible,
        GrowthFunction::Tabulated(_) => Verdict::Unknown,
    };
    let estimates = if profile.degenerate {
        ADMISSIBILITY_DELTAS.iter().map(|&d| (d, f64::INFINITY)).collect()
    } else {
        ADMISSIBILITY_DELTAS
            .iter()
            .map(|&d| Ok((d, inverse_beta_integral(d, &profile)?)))
            .collect::<Result<Vec<_>>>()?
    };
    let trend = (!g.is_catalog()).then(|| {
        let first = estimates[1].1 - estimates[0].1;
        let second = estimates[2].1 - estimates[1].1;
        second / first
    });
    Ok(AdmissibilityReport {
        verdict,
        estimates,
        trend,
    })
}

/// Exponents at which `phi` is tabulated from the initial vorticity.
pub const PHI_EXPONENTS: [f64; 10] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];

/// `phi(p) = C p ||omega0||_p + C ||u_bar||_2` at `p = 2, 4, ..., 1024` with
/// `M = 1`; use [`VorticityProfile::with_m`] to set the sup bound.
pub fn phi_from_initial_vorticity(omega0: &ScalarField, u_bar_l2: f64, c: f64) -> Result<VorticityProfile> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C = {c} must be positive")));
    }
    let table = PHI_EXPONENTS
        .iter()
        .map(|&p| {
            let norm = omega0.lp_norm(p)?;
            if !norm.is_finite() {
                return Err(Error::Numerical(format!("||omega0||_{p} is not finite")));
            }
            Ok((p, c * p * norm + c * u_bar_l2))
        })
        .collect::<Result<Vec<_>>>()?;
    VorticityProfile::from_phi_table(1.0, table)
}

fn check_rate_inputs(nu: f64, r: f64, t: f64) -> Result<f64> {
    let start = r * nu;
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::InvalidArgument(format!("R nu = {start} must be positive")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("T = {t} must be non-negative")));
    }
    Ok(start)
}

/// `f(nu)` by integrating `dr/ds = beta(r)` from `r(0) = R nu` to `s = T`
/// (Dormand-Prince in `ln r`, relative tolerance `1e-9`).
pub fn osgood_rate(nu: f64, r: f64, t: f64, profile: &VorticityProfile) -> Result<f64> {
    let start = check_rate_inputs(nu, r, t)?;
    if t == 0.0 {
        return Ok(start);
    }
    if profile.degenerate {
        return Ok(start);
    }
    let y = dormand_prince(
        |_, y| {
            let x = y.exp();
            beta(x, profile) / x
        },
        start.ln(),
        0.0,
        t,
        1e-9,
        1e-12,
    )?;
    let f = y.exp();
    if !f.is_finite() {
        return Err(Error::Numerical("beta is not finite along the Osgood path".into()));
    }
    Ok(f)
}

/// `f(nu)` by root-finding `int_{R nu}^{f} dr / beta(r) = T`.
pub fn osgood_rate_quadrature(nu: f64, r: f64, t: f64, profile: &VorticityProfile) -> Result<f64> {
    let start = check_rate_inputs(nu, r, t)?;
    if t == 0.0 || profile.degenerate {
        return Ok(start);
    }
    let y0 = start.ln();
    let elapsed = |y: f64| -> Result<f64> {
        let v = integrate(
            |z| {
                let x = z.exp();
                x / beta(x, profile)
            },
            y0,
            y,
            1e-13,
            1e-15,
        )?;
        if !v.is_finite() {
            return Err(Error::Numerical("beta is not finite along the Osgood path".into()));
        }
        Ok(v)
    };
    let mut width = 1.0;
    let mut hi = y0 + width;
    while elapsed(hi)? < t {
        width *= 2.0;
        hi = y0 + width;
        if width > 1e4 {
            return Err(Error::Numerical("Osgood quadrature failed to bracket T".into()));
        }
    }
    let lo = hi - width.min(hi - y0);
    let root = brent(|y| elapsed(y).unwrap_or(f64::NAN) - t, lo.max(y0), hi, 1e-14)?;
    Ok(root.exp())
}

/// Exact Osgood solution for constant growth `theta = C`, where
/// `beta(x) = C e x ln(M / x)` below `M / e` and `C M` above.
pub fn osgood_rate_constant_growth(nu: f64, r: f64, t: f64, m: f64, c: f64) -> Result<f64> {
    let start = check_rate_inputs(nu, r, t)?;
    let knee = m / E;
    let (mut x, mut left) = (start, t);
    if x < knee {
        let u0 = (m / x).ln();
        let to_knee = u0.ln() / (c * E);
        if left <= to_knee {
            return Ok(m * (-u0 * (-c * E * left).exp()).exp());
        }
        left -= to_knee;
        x = knee;
    }
    Ok(x + c * m * left)
}

/// `(nu t)^(exp(-C ||omega|| t) / 2)`.
pub fn closed_form_rate_bounded(nu: f64, t: f64, c: f64, norm_omega: f64) -> f64 {
    (nu * t).powf(0.5 * (-c * norm_omega * t).exp())
}

/// Finds `R` with `f(nu_anchor) = target` by bisection in `ln R`.
pub fn calibrate_r(nu_anchor: f64, target: f64, t: f64, profile: &VorticityProfile) -> Result<f64> {
    if !(target > 0.0 && nu_anchor > 0.0) {
        return Err(Error::InvalidArgument("calibration needs positive anchor values".into()));
    }
    // f >= R nu, so R <= target / nu
    let hi = (target / nu_anchor).ln();
    let lo = hi - 700.0;
    let g = |lr: f64| {
        osgood_rate(nu_anchor, lr.exp(), t, profile)
            .map(|f| f.ln() - target.ln())
            .unwrap_or(f64::NAN)
    };
    Ok(brent(g, lo, hi, 1e-12)?.exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub r: f64,
    pub t: f64,
    /// `(nu, f(nu), closed form or NaN)`.
    pub samples: Vec<(f64, f64, f64)>,
}

/// `f` on a viscosity grid, with the exact solution alongside for
/// constant-growth profiles.
pub fn rate_curve(nus: &[f64], r: f64, t: f64, profile: &VorticityProfile) -> Result<RateCurve> {
    let samples = nus
        .iter()
        .map(|&nu| {
            let f = osgood_rate(nu, r, t, profile)?;
            let closed = match profile.growth() {
                Some(GrowthFunction::Constant(c)) => osgood_rate_constant_growth(nu, r, t, profile.m, *c)?,
                _ => f64::NAN,
            };
            Ok((nu, f, closed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve { r, t, samples })
}

impl RateCurve {
    pub fn write_csv<W: Write>(&self, mut w: W, profile: &VorticityProfile, label: &str) -> Result<()> {
        writeln!(w, "# profile = {label}")?;
        writeln!(w, "# M = {:.16e}", profile.m)?;
        writeln!(w, "# R = {:.16e}", self.r)?;
        writeln!(w, "# T = {:.16e}", self.t)?;
        writeln!(w, "nu,f_nu,f_closed_form")?;
        for (nu, f, c) in &self.samples {
            writeln!(w, "{nu:.16e},{f:.16e},{c:.16e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;

    fn linear(m: f64) -> VorticityProfile {
        VorticityProfile::from_growth(m, GrowthFunction::Constant(1.0)).unwrap()
    }

    #[test]
    fn beta_eps_examples() {
        let p = linear(1.0);
        assert_eq!(beta_eps(0.0, 0.3, &p).unwrap(), 0.0);
        assert!((beta_eps(1.0, 0.5, &p).unwrap() - 2.0).abs() < 1e-14);
        let p3 = linear(3.0);
        assert!((beta_eps(3.0, 0.25, &p3).unwrap() - 3.0 * 4.0).abs() < 1e-12);
        assert!(beta_eps(1.0, 1.0, &p).is_err());
        assert!(beta_eps(1.0, 0.0, &p).is_err());
    }

    #[test]
    fn beta_closed_form() {
        let p = linear(1.0);
        let x = (-2.0f64).exp();
        assert!((beta(x, &p) - 2.0 / E).abs() < 1e-12);
        assert_eq!(beta(0.0, &p), 0.0);
        // above M / e the infimum sits at eps -> 1
        assert!((beta(0.5, &p) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_matches_brute_force_scan() {
        let p = VorticityProfile::from_growth(2.0, GrowthFunction::Log(0.7)).unwrap();
        for x in [1e-9, 1e-5, 0.01, 0.3] {
            let brute = (1..200_000)
                .map(|i| beta_eps(x, i as f64 / 200_000.0, &p).unwrap())
                .fold(f64::INFINITY, f64::min);
            let b = beta(x, &p);
            assert!(b <= brute * (1.0 + 1e-12));
            assert!((b - brute).abs() < 1e-6 * brute, "{x}: {b} vs {brute}");
        }
    }

    #[test]
    fn catalog_verdicts() {
        for m in [0.1, 1.0, 10.0] {
            assert_eq!(admissibility(&GrowthFunction::Constant(1.0), m).unwrap().verdict, Verdict::Admissible);
            assert_eq!(admissibility(&GrowthFunction::Log(1.0), m).unwrap().verdict, Verdict::Admissible);
            let power = GrowthFunction::Power { c: 1.0, gamma: 1.0 };
            assert_eq!(admissibility(&power, m).unwrap().verdict, Verdict::NotAdmissible);
        }
        let noisy = GrowthFunction::tabulated(vec![(2.0, 1.0), (4.0, 1.3), (8.0, 0.9), (16.0, 1.6)]).unwrap();
        let report = admissibility(&noisy, 1.0).unwrap();
        assert_eq!(report.verdict, Verdict::Unknown);
        assert!(report.trend.is_some());
    }

    #[test]
    fn integral_growth_separates_catalog() {
        // ln ln growth for constant theta, bounded for power growth
        let c = admissibility(&GrowthFunction::Constant(1.0), 1.0).unwrap();
        let p = admissibility(&GrowthFunction::Power { c: 1.0, gamma: 1.0 }, 1.0).unwrap();
        let inc = |r: &AdmissibilityReport| r.estimates[2].1 - r.estimates[1].1;
        assert!(inc(&c) > 0.2);
        assert!(inc(&p) < 0.5 * inc(&c));
    }

    #[test]
    fn osgood_matches_closed_form() {
        let p = linear(1.0);
        for nu in [1e-2f64, 1e-4, 1e-6] {
            for t in [0.1, 0.25, 0.5] {
                let exact = nu.powf((-E * t).exp());
                let ode = osgood_rate(nu, 1.0, t, &p).unwrap();
                let quad = osgood_rate_quadrature(nu, 1.0, t, &p).unwrap();
                assert!((ode - exact).abs() < 1e-6 * exact, "{nu} {t}: {ode} vs {exact}");
                assert!((ode - quad).abs() < 1e-7 * quad);
            }
        }
    }

    #[test]
    fn osgood_past_the_knee() {
        let p = linear(1.0);
        let exact = osgood_rate_constant_growth(1e-4, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((exact - 0.5511).abs() < 1e-3);
        let ode = osgood_rate(1e-4, 1.0, 1.0, &p).unwrap();
        assert!((ode - exact).abs() < 1e-6 * exact);
        assert_eq!(osgood_rate(1e-3, 2.0, 0.0, &p).unwrap(), 2e-3);
    }

    #[test]
    fn rate_is_monotone_in_nu() {
        let p = VorticityProfile::from_growth(1.0, GrowthFunction::Log(0.5)).unwrap();
        let nus: Vec<f64> = (0..10).map(|i| 10f64.powf(-6.0 + 0.5 * i as f64)).collect();
        let curve = rate_curve(&nus, 1.0, 0.3, &p).unwrap();
        assert!(curve.samples.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(curve.samples.iter().all(|s| s.2.is_nan()));
    }

    #[test]
    fn calibration_hits_target() {
        let p = linear(1.0);
        let r = calibrate_r(1e-2, 0.05, 0.5, &p).unwrap();
        assert!((osgood_rate(1e-2, r, 0.5, &p).unwrap() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn closed_form_bounded_examples() {
        assert!((closed_form_rate_bounded(0.01, 1.0, 0.0, 3.0) - 0.1).abs() < 1e-15);
        assert_eq!(closed_form_rate_bounded(2.0, 0.5, 1.0, 3.0), 1.0);
    }

    #[test]
    fn phi_of_unit_vorticity() {
        let d = build_domain(1.0, 2.0, 32, 32).unwrap();
        let area = d.area();
        let p = phi_from_initial_vorticity(&ScalarField::constant(d.clone(), 1.0), 0.5, 2.0).unwrap();
        for q in [2.0, 8.0, 64.0] {
            let exact = 2.0 * q * area.powf(1.0 / q) + 2.0 * 0.5;
            assert!((p.phi(q) - exact).abs() < 1e-10 * exact);
        }
        assert!(p.extrapolated(1.5) && !p.extrapolated(3.0));
        let z = phi_from_initial_vorticity(&ScalarField::zeros(d), 0.0, 1.0).unwrap();
        assert!(z.degenerate);
    }
}
