//! Splitting of tangent divergence-free fields into a zero-flux part and a
//! harmonic part. On an annulus the harmonic space is one-dimensional.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{VectorField, NORMAL_TRACE_TOL};
use crate::geometry::{AnnulusDomain, HomologyCut};

#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub grad_q: VectorField,
    /// `Z` in `grad_q = e_theta / (r Z)`.
    pub norm_constant: f64,
}

impl HarmonicBasis {
    /// All basis fields; a single entry for the annulus.
    pub fn fields(&self) -> &[VectorField] {
        std::slice::from_ref(&self.grad_q)
    }
}

#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub v0: VectorField,
    pub vc: VectorField,
    pub c: f64,
}

/// Normalised harmonic field `e_theta / (r Z)`.
///
/// `Z` is computed with the grid quadrature so the field has unit discrete
/// norm; it agrees with `sqrt(2 pi ln(b/a))` to quadrature accuracy.
pub fn harmonic_basis(domain: &Arc<AnnulusDomain>) -> HarmonicBasis {
    let z = harmonic_norm(domain);
    HarmonicBasis {
        grad_q: VectorField::from_fn(domain.clone(), |r, _| (0.0, 1.0 / (r * z))),
        norm_constant: z,
    }
}

/// Discrete L2 norm of `e_theta / r`.
pub fn harmonic_norm(domain: &AnnulusDomain) -> f64 {
    let s: f64 = domain
        .area_weights()
        .iter()
        .zip(&domain.radii)
        .map(|(w, r)| w / (r * r))
        .sum();
    (s * domain.n_theta as f64).sqrt()
}

/// Projects onto the harmonic field; `tol` bounds the wall normal trace and
/// the relative divergence.
pub fn decompose_with_tol(v: &VectorField, basis: &HarmonicBasis, tol: f64) -> Result<HodgeParts> {
    let normal = v.max_normal_trace();
    if normal > tol {
        return Err(Error::NormalTrace { max: normal, tol });
    }
    let scale = v.gradient_lp(2.0)?.max(v.l2());
    let div = v.divergence().l2();
    if div > 1e-3 * scale {
        return Err(Error::Divergence {
            max: div,
            tol: 1e-3 * scale,
        });
    }
    let c = v.inner(&basis.grad_q)?;
    let vc = basis.grad_q.scaled(c);
    let v0 = v.sub(&vc)?;
    Ok(HodgeParts { v0, vc, c })
}

pub fn decompose(v: &VectorField, basis: &HarmonicBasis) -> Result<HodgeParts> {
    decompose_with_tol(v, basis, NORMAL_TRACE_TOL)
}

/// `int_Sigma v . e_theta dr` along the radial cut.
pub fn internal_flux(v: &VectorField, cut: &HomologyCut) -> f64 {
    let d = v.domain();
    let w = d.radial.weights();
    (0..d.n_r)
        .map(|j| w[j] * v.u_theta()[[j, cut.theta_index]])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::biot_savart;
    use crate::field::ScalarField;
    use crate::geometry::build_domain;
    use std::f64::consts::PI;

    #[test]
    fn basis_is_normalised() {
        let d = build_domain(1.0, 2.0, 64, 32).unwrap();
        let b = harmonic_basis(&d);
        assert!((b.norm_constant - (2.0 * PI * 2f64.ln()).sqrt()).abs() < 1e-6);
        assert!((b.grad_q.l2() - 1.0).abs() < 1e-12);
        assert!(b.grad_q.curl().linf() < 1e-10);
        assert_eq!(b.grad_q.max_normal_trace(), 0.0);
        assert_eq!(b.fields().len(), 1);
    }

    #[test]
    fn projection_of_basis_and_rotation() {
        let d = build_domain(1.0, 2.0, 64, 32).unwrap();
        let b = harmonic_basis(&d);
        let p = decompose(&b.grad_q, &b).unwrap();
        assert!((p.c - 1.0).abs() < 1e-12);
        assert!(p.v0.l2() < 1e-12);
        let rot = VectorField::from_fn(d.clone(), |r, _| (0.0, r));
        let p = decompose(&rot, &b).unwrap();
        assert!((p.c - 3.0 * PI / b.norm_constant).abs() < 1e-8);
    }

    #[test]
    fn zero_flux_fields_are_orthogonal() {
        let d = build_domain(1.0, 2.0, 64, 64).unwrap();
        let b = harmonic_basis(&d);
        let omega = ScalarField::from_fn(d.clone(), |r, t| (r * t.sin()).exp());
        let u = biot_savart(&omega).unwrap();
        let p = decompose(&u, &b).unwrap();
        assert!(p.c.abs() < 1e-10 * u.l2());
        assert!(internal_flux(&u, &HomologyCut::default()).abs() < 1e-12);
    }

    #[test]
    fn flux_of_harmonic_field() {
        let d = build_domain(1.0, 2.0, 256, 16).unwrap();
        let v = VectorField::from_fn(d.clone(), |r, _| (0.0, 1.0 / r));
        assert!((internal_flux(&v, &HomologyCut::default()) - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_fields_with_normal_flow() {
        let d = build_domain(1.0, 2.0, 16, 16).unwrap();
        let b = harmonic_basis(&d);
        let v = VectorField::from_fn(d, |_, _| (0.5, 0.0));
        assert!(decompose(&v, &b).is_err());
    }
}
