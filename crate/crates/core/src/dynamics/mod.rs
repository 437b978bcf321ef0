//! Vorticity-streamfunction time integration with Navier, Lions, no-slip and
//! inviscid (Euler) wall behaviour.
//!
//! The state is the nodal vorticity plus the counter-clockwise circulation
//! around the inner circle; together they determine the velocity through the
//! Dirichlet Biot-Savart map and the harmonic field of the annulus.

pub mod presets;
pub mod series;
mod stepper;
pub mod weak;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elliptic::PoissonSolver;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{AnnulusDomain, Side};
use crate::hodge::{harmonic_basis, HarmonicBasis};
use crate::stencil::RadialOps;

pub use series::{TimeSeries, TimeSeriesRow};
pub use stepper::Stepper;
pub use weak::weak_residual;

/// Wall behaviour. Navier friction arrays hold one value per boundary node.
#[derive(Debug, Clone, PartialEq)]
pub enum BCSpec {
    Navier { inner: Vec<f64>, outer: Vec<f64> },
    Lions,
    NoSlip,
    Euler,
}

impl BCSpec {
    pub fn navier_uniform(domain: &AnnulusDomain, alpha_inner: f64, alpha_outer: f64) -> Self {
        BCSpec::Navier {
            inner: vec![alpha_inner; domain.n_theta],
            outer: vec![alpha_outer; domain.n_theta],
        }
    }

    pub fn navier_constant(domain: &AnnulusDomain, alpha: f64) -> Self {
        Self::navier_uniform(domain, alpha, alpha)
    }

    /// Friction arrays for Navier-type conditions; Lions becomes `alpha = 2 kappa`.
    pub fn friction(&self, domain: &AnnulusDomain) -> Result<Option<[Vec<f64>; 2]>> {
        match self {
            BCSpec::Navier { inner, outer } => {
                for (name, a) in [("inner", inner), ("outer", outer)] {
                    if a.len() != domain.n_theta {
                        return Err(Error::InvalidArgument(format!(
                            "{name} friction has {} samples, boundary has {}",
                            a.len(),
                            domain.n_theta
                        )));
                    }
                    if a.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "{name} friction has non-finite samples"
                        )));
                    }
                }
                Ok(Some([inner.clone(), outer.clone()]))
            }
            BCSpec::Lions => Ok(Some([
                vec![2.0 * domain.inner.curvature; domain.n_theta],
                vec![2.0 * domain.outer.curvature; domain.n_theta],
            ])),
            BCSpec::NoSlip | BCSpec::Euler => Ok(None),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BCSpec::Navier { .. } => "navier",
            BCSpec::Lions => "lions",
            BCSpec::NoSlip => "no_slip",
            BCSpec::Euler => "euler",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub omega: ScalarField,
    pub circulation_inner: f64,
    pub t: f64,
}

impl SimState {
    pub fn new(omega: ScalarField, circulation_inner: f64) -> Self {
        Self {
            omega,
            circulation_inner,
            t: 0.0,
        }
    }

    pub fn domain(&self) -> &Arc<AnnulusDomain> {
        self.omega.domain_arc()
    }

    pub fn is_finite(&self) -> bool {
        self.circulation_inner.is_finite() && self.omega.values().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionScheme {
    Explicit,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub cfl_max: f64,
    pub diffusion: DiffusionScheme,
}

impl StepParams {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            cfl_max: 0.5,
            diffusion: DiffusionScheme::SemiImplicit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.cfl_max > 0.0 && self.cfl_max <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "cfl_max = {} must lie in (0, 0.5]",
                self.cfl_max
            )));
        }
        Ok(())
    }
}

/// Maps `(omega, inner circulation)` to velocity.
#[derive(Debug, Clone)]
pub struct VelocityMap {
    solver: PoissonSolver,
    basis: HarmonicBasis,
}

impl VelocityMap {
    pub fn new(domain: Arc<AnnulusDomain>) -> Result<Self> {
        let basis = harmonic_basis(&domain);
        Ok(Self {
            solver: PoissonSolver::new(domain)?,
            basis,
        })
    }

    pub fn domain(&self) -> &Arc<AnnulusDomain> {
        self.solver.domain()
    }

    pub fn solver(&self) -> &PoissonSolver {
        &self.solver
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    /// Harmonic coefficient giving inner circulation `gamma` on top of `u0`.
    pub fn harmonic_coefficient(&self, u0: &VectorField, gamma: f64) -> f64 {
        let basis_circ = 2.0 * PI / self.basis.norm_constant;
        (gamma - u0.circulation(Side::Inner)) / basis_circ
    }

    pub fn velocity(&self, omega: &ScalarField, gamma: f64) -> Result<VectorField> {
        let u0 = self.solver.biot_savart(omega)?;
        let c = self.harmonic_coefficient(&u0, gamma);
        u0.add_scaled(c, &self.basis.grad_q)
    }
}

pub fn reconstruct_velocity(state: &SimState) -> Result<VectorField> {
    VelocityMap::new(state.domain().clone())?.velocity(&state.omega, state.circulation_inner)
}

/// Wall vorticity `(2 kappa - alpha) u . tau` as `[inner, outer]` samples.
pub fn navier_boundary_vorticity(u: &VectorField, bc: &BCSpec) -> Result<[Vec<f64>; 2]> {
    let d = u.domain();
    let Some(alpha) = bc.friction(d)? else {
        return Err(Error::UnsupportedBoundary(format!(
            "{} walls have no Navier vorticity relation",
            bc.name()
        )));
    };
    let normal = u.max_normal_trace();
    if normal > crate::field::NORMAL_TRACE_TOL {
        return Err(Error::NormalTrace {
            max: normal,
            tol: crate::field::NORMAL_TRACE_TOL,
        });
    }
    let mut out = [Vec::new(), Vec::new()];
    for (i, comp) in d.components().iter().enumerate() {
        out[i] = u
            .tangential_trace(comp.side)
            .iter()
            .zip(&alpha[i])
            .map(|(ut, a)| (2.0 * comp.curvature - a) * ut)
            .collect();
    }
    Ok(out)
}

/// Radial derivative of vorticity at the inner wall, averaged over angle.
pub(crate) fn inner_wall_flux(radial: &RadialOps, omega: &ScalarField) -> f64 {
    let row = &radial.first_derivative_rows()[0];
    let v = omega.values();
    let n = v.ncols();
    (0..n)
        .map(|k| RadialOps::eval_row(row, |j| v[[j, k]]))
        .sum::<f64>()
        / n as f64
}

/// `nu * oint_{inner} d_r omega ds`, the rate of change of the inner circulation.
pub fn circulation_rhs(state: &SimState, nu: f64) -> f64 {
    if nu == 0.0 {
        return 0.0;
    }
    let d = state.domain();
    nu * 2.0 * PI * d.r_inner * inner_wall_flux(&d.radial, &state.omega)
}

/// `||u||_2` of the reconstructed velocity.
pub fn energy(state: &SimState) -> Result<f64> {
    Ok(reconstruct_velocity(state)?.l2())
}

/// `||omega||_p`.
pub fn enstrophy_p(state: &SimState, p: f64) -> Result<f64> {
    state.omega.lp_norm(p)
}

/// Advances one step, building the operators from scratch.
///
/// Loops should construct a [`Stepper`] once instead.
pub fn step(state: &SimState, bc: &BCSpec, nu: f64, params: StepParams) -> Result<SimState> {
    Stepper::new(state.domain().clone(), bc.clone(), nu, params)?.step(state)
}
