//! Desk-scale laboratory for two-dimensional incompressible flow on an annulus
//! with Navier (slip-with-friction) boundary conditions.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] - the annulus, its polar grid, boundary frames and quadrature.
//! * [`field`] - sampled scalar/vector fields, discrete calculus and norms.
//! * [`elliptic`] - the Dirichlet streamfunction solver and the Biot-Savart map.
//! * [`hodge`] - the harmonic field of the annulus and the `H0 + Hc` splitting.
//! * [`dynamics`] - vorticity-streamfunction time stepping for Navier, Lions,
//!   no-slip and Euler boundary behaviour, plus weak-form residuals.
//! * [`theory`] - Yudovich growth functions, the `beta` modulus and the Osgood
//!   convergence rate.
//! * [`lab`] - viscosity and friction sweeps, energy audits and log-log fits.
//! * [`oracle`] - an independent Chebyshev solver for radially symmetric data.

pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod geometry;
pub mod hodge;
pub mod lab;
pub mod numerics;
pub mod oracle;
pub mod spectral;
pub mod stencil;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{build_domain, AnnulusDomain, BoundaryComponent, HomologyCut, Side};
pub use field::{ScalarField, VectorField};
