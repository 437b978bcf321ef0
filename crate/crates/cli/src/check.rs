//! Invariant suites run at two resolutions.

use std::f64::consts::PI;

use nslab::dynamics::presets::{bump, radial_bump, BandLimitedStream, RadialProfile};
use nslab::dynamics::{BCSpec, SimState, StepParams, Stepper};
use nslab::field::{check_strain_identity, laplacian};
use nslab::hodge::{decompose, harmonic_basis, internal_flux};
use nslab::oracle::RadialOracle;
use nslab::{build_domain, HomologyCut, Result, ScalarField, VectorField};

pub struct Check {
    pub name: String,
    pub coarse: f64,
    pub fine: f64,
    /// Coarse over fine, for refinement checks.
    pub ratio: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn refinement(name: &str, coarse: f64, fine: f64, band: (f64, f64)) -> Self {
        let ratio = coarse / fine;
        Check {
            name: name.into(),
            coarse,
            fine,
            ratio: Some(ratio),
            pass: ratio >= band.0 && ratio <= band.1,
        }
    }

    /// At least second-order decay under refinement.
    fn converging(name: &str, coarse: f64, fine: f64) -> Self {
        Check {
            pass: coarse / fine >= SECOND_ORDER.0,
            ..Self::refinement(name, coarse, fine, SECOND_ORDER)
        }
    }

    fn bounded(name: &str, coarse: f64, fine: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            coarse,
            fine,
            ratio: None,
            pass: coarse <= tol && fine <= tol,
        }
    }
}

const SECOND_ORDER: (f64, f64) = (3.4, 4.6);

fn unit_stream(d: &std::sync::Arc<nslab::AnnulusDomain>, seed: u64, profile: RadialProfile) -> BandLimitedStream {
    let s = BandLimitedStream::new(d, seed, 4, 6, profile);
    let norm = s.velocity(d.clone()).l2();
    s.scaled(1.0 / norm)
}

pub fn identities() -> Result<Vec<Check>> {
    let mut strain = [0.0f64; 2];
    let mut compat = [0.0f64; 2];
    let mut div = [0.0f64; 2];
    for (i, (nr, nt)) in [(64, 128), (128, 256)].into_iter().enumerate() {
        let d = build_domain(1.0, 2.0, nr, nt)?;
        for seed in 0..10 {
            let s = unit_stream(&d, seed, RadialProfile::SineSquared);
            let v = s.velocity(d.clone());
            strain[i] = strain[i].max(check_strain_identity(&v)?);
            let psi = s.streamfunction(d.clone());
            let discrete = VectorField::perp_grad(&psi);
            let err = discrete.curl().sub(&laplacian(&psi))?;
            compat[i] = compat[i].max(err.l2() / laplacian(&psi).l2());
            div[i] = div[i].max(discrete.divergence().l2());
        }
    }
    Ok(vec![
        Check::refinement("strain identity residual", strain[0], strain[1], SECOND_ORDER),
        Check::converging("curl(perp grad psi) - lap psi, relative", compat[0], compat[1]),
        Check::bounded("div(perp grad psi)", div[0], div[1], 1e-10),
    ])
}

pub fn hodge() -> Result<Vec<Check>> {
    let mut orth = [0.0; 2];
    let mut pyth = [0.0; 2];
    let mut flux = [0.0; 2];
    for (i, n_r) in [128, 256].into_iter().enumerate() {
        let d = build_domain(1.0, 2.0, n_r, 64)?;
        let basis = harmonic_basis(&d);
        let vortex = VectorField::from_fn(d.clone(), |r, _| (0.0, 1.0 / r));
        let v = unit_stream(&d, 42, RadialProfile::Sine).velocity(d.clone()).add_scaled(0.7, &vortex)?;
        let parts = decompose(&v, &basis)?;
        orth[i] = parts.v0.inner(&parts.vc)?.abs() / (parts.v0.l2() * parts.vc.l2());
        let total = v.l2().powi(2);
        pyth[i] = (total - parts.v0.l2().powi(2) - parts.vc.l2().powi(2)).abs() / total;
        let harmonic = basis.grad_q.scaled(basis.norm_constant);
        flux[i] = (internal_flux(&harmonic, &HomologyCut::default()) - 2f64.ln()).abs();
    }
    Ok(vec![
        Check::bounded("orthogonality |(v0, vc)| / (|v0||vc|)", orth[0], orth[1], 1e-10),
        Check::bounded("Pythagoras, relative", pyth[0], pyth[1], 1e-8),
        Check::bounded("harmonic flux - ln 2", flux[0], flux[1], 1e-6),
    ])
}

pub fn oracle() -> Result<Vec<Check>> {
    let (nu, horizon) = (0.05, 0.5);
    let mut l2 = [0.0f64; 2];
    let mut circ = [0.0f64; 2];
    for (i, (n, dt)) in [(64, 0.0025), (128, 0.00125)].into_iter().enumerate() {
        let d = build_domain(1.0, 2.0, n, n)?;
        let s0 = radial_bump(d.clone(), 1.5, 0.4, 1.0);
        let st = Stepper::new(d.clone(), BCSpec::navier_constant(&d, 1.0), nu, StepParams::new(dt))?;
        let mut history: Vec<SimState> = Vec::new();
        st.run(&s0, (horizon / dt).round() as usize, |s, _| {
            history.push(s.clone());
            Ok(())
        })?;
        let times: Vec<f64> = history.iter().map(|s| s.t).collect();
        let snaps = RadialOracle::new(1.0, 2.0, nu, [1.0, 1.0], 128)?.solve(|r| bump(r, 1.5, 0.4, 1.0), 0.0, &times)?;
        for (s, o) in history.iter().zip(&snaps) {
            let exact = ScalarField::from_fn(d.clone(), |r, _| o.eval(r));
            l2[i] = l2[i].max(s.omega.sub(&exact)?.l2() / exact.l2());
            circ[i] = circ[i].max((s.circulation_inner - o.circulation).abs() / (2.0 * PI));
        }
    }
    Ok(vec![
        Check::bounded("radial oracle relative L2 mismatch", l2[0], l2[1], 1e-3),
        Check::bounded("circulation mismatch / 2 pi", circ[0], circ[1], 1e-5),
    ])
}

pub fn print_table(suite: &str, checks: &[Check]) {
    println!("suite {suite}");
    println!("{:<44} {:>12} {:>12} {:>8}  result", "check", "coarse", "fine", "ratio");
    for c in checks {
        let ratio = c.ratio.map_or("-".to_string(), |r| format!("{r:.3}"));
        println!(
            "{:<44} {:>12.4e} {:>12.4e} {:>8}  {}",
            c.name,
            c.coarse,
            c.fine,
            ratio,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
}
