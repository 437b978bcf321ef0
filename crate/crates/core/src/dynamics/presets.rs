//! Initial data.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimState;
use crate::elliptic::velocity_from_streamfunction;
use crate::field::{laplacian, ScalarField, VectorField};
use crate::geometry::{AnnulusDomain, Side};

/// Smooth compactly supported radial profile with peak value `amplitude`.
pub fn bump(r: f64, center: f64, half_width: f64, amplitude: f64) -> f64 {
    let s = (r - center) / half_width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Radially symmetric vorticity bump with zero inner circulation.
pub fn radial_bump(domain: Arc<AnnulusDomain>, center: f64, half_width: f64, amplitude: f64) -> SimState {
    let omega = ScalarField::from_fn(domain, |r, _| bump(r, center, half_width, amplitude));
    SimState::new(omega, 0.0)
}

/// Irrotational flow with the given inner circulation (`u = gamma e_theta / (2 pi r)`).
pub fn pure_circulation(domain: Arc<AnnulusDomain>, gamma: f64) -> SimState {
    SimState::new(ScalarField::zeros(domain), gamma)
}

/// Disc of uniform vorticity centred at polar position `(rc, thc)`, with its
/// edge smoothed over twice the local grid spacing.
pub fn mollified_patch(
    domain: Arc<AnnulusDomain>,
    rc: f64,
    thc: f64,
    radius: f64,
    amplitude: f64,
) -> SimState {
    let h = domain.dr.max(rc * domain.dtheta);
    let eps = 2.0 * h;
    let (xc, yc) = (rc * thc.cos(), rc * thc.sin());
    let omega = ScalarField::from_fn(domain, |r, t| {
        let dist = (r * t.cos() - xc).hypot(r * t.sin() - yc);
        0.5 * amplitude * (1.0 - ((dist - radius) / eps).tanh())
    });
    SimState::new(omega, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialProfile {
    /// `sin(k s)`: the streamfunction vanishes on both walls.
    Sine,
    /// `sin^2(k s)`: streamfunction and wall velocity both vanish.
    SineSquared,
}

/// Random streamfunction `sum c f_k(r) (cos m theta, sin m theta)` with
/// `s = pi (r - a) / (b - a)` and coefficients decaying like `1/(k^2 + m^2)`.
#[derive(Debug, Clone)]
pub struct BandLimitedStream {
    a: f64,
    b: f64,
    profile: RadialProfile,
    terms: Vec<(f64, f64, f64, f64)>,
}

impl BandLimitedStream {
    pub fn new(
        domain: &AnnulusDomain,
        seed: u64,
        k_max: usize,
        m_max: usize,
        profile: RadialProfile,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for k in 1..=k_max {
            for m in 0..=m_max {
                let decay = 1.0 / ((k * k + m * m) as f64);
                let cc = rng.gen_range(-1.0..1.0) * decay;
                let cs = if m == 0 {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0) * decay
                };
                terms.push((k as f64, m as f64, cc, cs));
            }
        }
        Self {
            a: domain.r_inner,
            b: domain.r_outer,
            profile,
            terms,
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for t in &mut self.terms {
            t.2 *= factor;
            t.3 *= factor;
        }
        self
    }

    fn radial(&self, k: f64, r: f64) -> (f64, f64) {
        let scale = PI / (self.b - self.a);
        let s = scale * (r - self.a);
        match self.profile {
            RadialProfile::Sine => ((k * s).sin(), k * scale * (k * s).cos()),
            RadialProfile::SineSquared => {
                let sn = (k * s).sin();
                (sn * sn, k * scale * (2.0 * k * s).sin())
            }
        }
    }

    /// `(psi, d_r psi, d_theta psi)`.
    pub fn eval(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for &(k, m, cc, cs) in &self.terms {
            let (f, df) = self.radial(k, r);
            let (c, s) = ((m * theta).cos(), (m * theta).sin());
            let ang = cc * c + cs * s;
            out.0 += f * ang;
            out.1 += df * ang;
            out.2 += f * m * (cs * c - cc * s);
        }
        out
    }

    pub fn streamfunction(&self, domain: Arc<AnnulusDomain>) -> ScalarField {
        ScalarField::from_fn(domain, |r, t| self.eval(r, t).0)
    }

    /// Exact `grad-perp psi` sampled on the grid.
    pub fn velocity(&self, domain: Arc<AnnulusDomain>) -> VectorField {
        VectorField::from_fn(domain, |r, t| {
            let (_, dr, dth) = self.eval(r, t);
            (-dth / r, dr)
        })
    }

    /// State whose reconstructed velocity is the discrete `grad-perp` of the
    /// sampled streamfunction.
    pub fn state(&self, domain: Arc<AnnulusDomain>) -> SimState {
        let psi = self.streamfunction(domain);
        let omega = laplacian(&psi);
        let gamma = velocity_from_streamfunction(&psi).circulation(Side::Inner);
        SimState::new(omega, gamma)
    }
}

/// Band-limited state rescaled to unit kinetic-energy norm.
pub fn random_state(
    domain: Arc<AnnulusDomain>,
    seed: u64,
    k_max: usize,
    m_max: usize,
    profile: RadialProfile,
) -> SimState {
    let stream = BandLimitedStream::new(&domain, seed, k_max, m_max, profile);
    let norm = stream.velocity(domain.clone()).l2();
    stream.scaled(1.0 / norm).state(domain)
}
