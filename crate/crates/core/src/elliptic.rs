//! Dirichlet Poisson solver and the Biot-Savart map from vorticity to the
//! zero-flux velocity field.

use std::sync::Arc;

use ndarray::{Array2, Axis};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{compact_radial_coeffs, ScalarField, VectorField};
use crate::geometry::AnnulusDomain;
use crate::stencil::Tridiagonal;

#[derive(Debug, Clone)]
pub struct PoissonSolve {
    pub psi: ScalarField,
    pub u0: VectorField,
    /// Max-norm residual of each Fourier-mode radial system, in FFT bin order.
    pub mode_residuals: Vec<f64>,
}

/// Interior rows `1..n_r-1` of the mode-`m` radial operator
/// `f'' + f'/r - m^2 f / r^2` as `(sub, diag, sup)`.
pub(crate) fn mode_operator(domain: &AnnulusDomain, m: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = domain.n_r - 2;
    let mut sub = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    for j in 1..domain.n_r - 1 {
        let r = domain.radii[j];
        let (lo, mid, hi) = compact_radial_coeffs(domain.dr, r);
        sub.push(lo);
        diag.push(mid - m * m / (r * r));
        sup.push(hi);
    }
    (sub, diag, sup)
}

/// Pre-factored radial systems for every Fourier mode.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    domain: Arc<AnnulusDomain>,
    factors: Vec<Tridiagonal>,
    operators: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl PoissonSolver {
    pub fn new(domain: Arc<AnnulusDomain>) -> Result<Self> {
        let half = domain.n_theta / 2;
        let mut factors = Vec::with_capacity(half + 1);
        let mut operators = Vec::with_capacity(half + 1);
        for m in 0..=half {
            let (sub, diag, sup) = mode_operator(&domain, m as f64);
            factors.push(Tridiagonal::factor(&sub, &diag, &sup).map_err(|_| {
                Error::Singular(format!("Dirichlet radial system for mode {m}"))
            })?);
            operators.push((sub, diag, sup));
        }
        Ok(Self {
            domain,
            factors,
            operators,
        })
    }

    pub fn domain(&self) -> &Arc<AnnulusDomain> {
        &self.domain
    }

    /// Solves the mode-`m` interior system in place (walls held at zero).
    pub(crate) fn solve_mode<T>(&self, m: usize, buf: &mut [T])
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        self.factors[m].solve_in_place(buf);
    }

    fn mode_index(&self, k: usize) -> usize {
        self.domain.theta.wavenumber(k).abs() as usize
    }

    /// Solves every mode in place on Fourier coefficients of the right-hand
    /// side; wall rows are set to zero.
    pub fn solve_coefficients(&self, coeffs: &mut Array2<Complex64>) {
        let n_r = self.domain.n_r;
        let mut buf = vec![Complex64::new(0.0, 0.0); n_r - 2];
        for (k, mut col) in coeffs.axis_iter_mut(Axis(1)).enumerate() {
            for j in 1..n_r - 1 {
                buf[j - 1] = col[j];
            }
            self.factors[self.mode_index(k)].solve_in_place(&mut buf);
            col[0] = Complex64::new(0.0, 0.0);
            col[n_r - 1] = Complex64::new(0.0, 0.0);
            for j in 1..n_r - 1 {
                col[j] = buf[j - 1];
            }
        }
    }

    pub fn solve(&self, omega: &ScalarField) -> Result<PoissonSolve> {
        let d = &self.domain;
        if !d.same_grid(omega.domain()) {
            return Err(Error::ShapeMismatch {
                expected: d.shape(),
                got: omega.domain().shape(),
            });
        }
        let rhs = d.theta.forward_rows(omega.values().view());
        let mut sol = rhs.clone();
        self.solve_coefficients(&mut sol);
        let mode_residuals = (0..d.n_theta)
            .map(|k| {
                let (sub, diag, sup) = &self.operators[self.mode_index(k)];
                (1..d.n_r - 1)
                    .map(|j| {
                        let i = j - 1;
                        let lhs = sol[[j - 1, k]] * sub[i]
                            + sol[[j, k]] * diag[i]
                            + sol[[j + 1, k]] * sup[i];
                        (lhs - rhs[[j, k]]).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let psi = ScalarField::from_parts(d.clone(), d.theta.inverse_rows(sol));
        let u0 = velocity_from_streamfunction(&psi);
        Ok(PoissonSolve {
            psi,
            u0,
            mode_residuals,
        })
    }

    pub fn biot_savart(&self, omega: &ScalarField) -> Result<VectorField> {
        Ok(self.solve(omega)?.u0)
    }
}

/// `grad-perp psi` for a streamfunction vanishing on both walls; the wall
/// normal component is set to exactly zero.
pub fn velocity_from_streamfunction(psi: &ScalarField) -> VectorField {
    let (mut u_r, u_theta) = VectorField::perp_grad(psi).into_components();
    let last = psi.domain().n_r - 1;
    u_r.row_mut(0).fill(0.0);
    u_r.row_mut(last).fill(0.0);
    VectorField::from_parts(psi.domain_arc().clone(), u_r, u_theta)
}

pub fn solve_poisson_dirichlet(omega: &ScalarField) -> Result<PoissonSolve> {
    PoissonSolver::new(omega.domain_arc().clone())?.solve(omega)
}

pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    Ok(solve_poisson_dirichlet(omega)?.u0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::laplacian;
    use crate::geometry::build_domain;

    #[test]
    fn constant_vorticity_matches_radial_ode() {
        let d = build_domain(1.0, 2.0, 128, 16).unwrap();
        let c = 1.5;
        let ln2 = 2f64.ln();
        // psi = c r^2/4 + A ln r + B with psi(1) = psi(2) = 0
        let b = -c / 4.0;
        let a = -(c + b) / ln2;
        let sol = solve_poisson_dirichlet(&ScalarField::constant(d.clone(), c)).unwrap();
        for ((j, _), v) in sol.psi.values().indexed_iter() {
            let r = d.radii[j];
            assert!((v - (c * r * r / 4.0 + a * r.ln() + b)).abs() < 1e-5);
        }
        assert!(sol.mode_residuals.iter().all(|&x| x < 1e-9));
    }

    #[test]
    fn inverse_consistency_for_manufactured_streamfunction() {
        let d = build_domain(1.0, 2.0, 48, 32).unwrap();
        let psi = ScalarField::from_fn(d.clone(), |r, t| (r - 1.0) * (2.0 - r) * t.sin());
        let omega = laplacian(&psi);
        let sol = solve_poisson_dirichlet(&omega).unwrap();
        let err = sol.psi.sub(&psi).unwrap().linf();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn zero_vorticity_gives_zero() {
        let d = build_domain(1.0, 2.0, 16, 16).unwrap();
        let sol = solve_poisson_dirichlet(&ScalarField::zeros(d)).unwrap();
        assert_eq!(sol.psi.linf(), 0.0);
        assert_eq!(sol.u0.l2(), 0.0);
    }

    #[test]
    fn output_is_tangent_with_zero_flux() {
        let d = build_domain(1.0, 2.0, 64, 64).unwrap();
        let omega = ScalarField::from_fn(d.clone(), |r, t| r * t.cos() + 1.0);
        let u = biot_savart(&omega).unwrap();
        assert_eq!(u.max_normal_trace(), 0.0);
        let w = d.radial.weights();
        for k in [0, 17, 40] {
            let flux: f64 = (0..d.n_r).map(|j| w[j] * u.u_theta()[[j, k]]).sum();
            assert!(flux.abs() < 1e-12);
        }
        let rel = u.curl().sub(&omega).unwrap().l2() / omega.l2();
        assert!(rel < 1e-3);
    }
}
