//! Sampled scalar and vector fields with discrete calculus and norms.

use std::io::Write;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};
use crate::geometry::{AnnulusDomain, BoundaryComponent, Side};
use crate::stencil::RadialOps;

/// Default tolerance on `|v . n|` for operations that need tangent fields.
pub const NORMAL_TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ScalarField {
    domain: Arc<AnnulusDomain>,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<AnnulusDomain>, values: Array2<f64>) -> Result<Self> {
        domain.check_shape(values.view())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("scalar field has non-finite values".into()));
        }
        Ok(Self { domain, values })
    }

    pub(crate) fn from_parts(domain: Arc<AnnulusDomain>, values: Array2<f64>) -> Self {
        Self { domain, values }
    }

    pub fn zeros(domain: Arc<AnnulusDomain>) -> Self {
        let values = Array2::zeros(domain.shape());
        Self { domain, values }
    }

    pub fn constant(domain: Arc<AnnulusDomain>, c: f64) -> Self {
        let values = Array2::from_elem(domain.shape(), c);
        Self { domain, values }
    }

    /// Samples `f(r, theta)` at every node.
    pub fn from_fn(domain: Arc<AnnulusDomain>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values =
            Array2::from_shape_fn(domain.shape(), |(j, k)| f(domain.radii[j], domain.thetas[k]));
        Self { domain, values }
    }

    pub fn domain(&self) -> &AnnulusDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<AnnulusDomain> {
        &self.domain
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn boundary_values(&self, side: Side) -> Vec<f64> {
        let j = self.domain.component(side).radial_index;
        self.values.row(j).to_vec()
    }

    pub fn integral(&self) -> f64 {
        self.domain
            .integrate(self.values.view())
            .expect("field shape matches its own domain")
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        lp_norm(self, 2.0).expect("p = 2 is valid")
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        check_same(&self.domain, &other.domain)?;
        Ok(Self::from_parts(
            self.domain.clone(),
            &self.values - &other.values,
        ))
    }

    /// Writes `r,theta,value` rows, radius-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,theta,value")?;
        for ((j, k), v) in self.values.indexed_iter() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.domain.radii[j], self.domain.thetas[k], v
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VectorField {
    domain: Arc<AnnulusDomain>,
    u_r: Array2<f64>,
    u_theta: Array2<f64>,
}

impl VectorField {
    pub fn new(domain: Arc<AnnulusDomain>, u_r: Array2<f64>, u_theta: Array2<f64>) -> Result<Self> {
        domain.check_shape(u_r.view())?;
        domain.check_shape(u_theta.view())?;
        if u_r.iter().chain(u_theta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("vector field has non-finite values".into()));
        }
        Ok(Self {
            domain,
            u_r,
            u_theta,
        })
    }

    pub(crate) fn from_parts(
        domain: Arc<AnnulusDomain>,
        u_r: Array2<f64>,
        u_theta: Array2<f64>,
    ) -> Self {
        Self {
            domain,
            u_r,
            u_theta,
        }
    }

    pub fn zeros(domain: Arc<AnnulusDomain>) -> Self {
        let z = Array2::zeros(domain.shape());
        Self {
            u_r: z.clone(),
            u_theta: z,
            domain,
        }
    }

    /// Samples polar components `f(r, theta) = (u_r, u_theta)`.
    pub fn from_fn(domain: Arc<AnnulusDomain>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let (n_r, n_t) = domain.shape();
        let mut u_r = Array2::zeros((n_r, n_t));
        let mut u_theta = Array2::zeros((n_r, n_t));
        for j in 0..n_r {
            for k in 0..n_t {
                let (a, b) = f(domain.radii[j], domain.thetas[k]);
                u_r[[j, k]] = a;
                u_theta[[j, k]] = b;
            }
        }
        Self {
            domain,
            u_r,
            u_theta,
        }
    }

    /// Samples Cartesian components `f(x, y) = (v_x, v_y)`.
    pub fn from_cartesian_fn(
        domain: Arc<AnnulusDomain>,
        f: impl Fn(f64, f64) -> (f64, f64),
    ) -> Self {
        Self::from_fn(domain, |r, t| {
            let (c, s) = (t.cos(), t.sin());
            let (vx, vy) = f(r * c, r * s);
            (vx * c + vy * s, -vx * s + vy * c)
        })
    }

    /// `u = grad-perp psi`: `u_r = -(1/r) d_theta psi`, `u_theta = d_r psi`.
    pub fn perp_grad(psi: &ScalarField) -> Self {
        let d = psi.domain_arc().clone();
        let dth = d.theta.derivative(psi.values().view());
        let mut u_r = dth;
        for (j, mut row) in u_r.outer_iter_mut().enumerate() {
            let inv_r = -1.0 / d.radii[j];
            row.mapv_inplace(|v| v * inv_r);
        }
        let u_theta = d.radial.derivative(psi.values().view());
        Self {
            domain: d,
            u_r,
            u_theta,
        }
    }

    pub fn domain(&self) -> &AnnulusDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<AnnulusDomain> {
        &self.domain
    }

    pub fn u_r(&self) -> &Array2<f64> {
        &self.u_r
    }

    pub fn u_theta(&self) -> &Array2<f64> {
        &self.u_theta
    }

    pub fn into_components(self) -> (Array2<f64>, Array2<f64>) {
        (self.u_r, self.u_theta)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts(
            self.domain.clone(),
            &self.u_r * c,
            &self.u_theta * c,
        )
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        check_same(&self.domain, &other.domain)?;
        Ok(Self::from_parts(
            self.domain.clone(),
            &self.u_r + &other.u_r,
            &self.u_theta + &other.u_theta,
        ))
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        check_same(&self.domain, &other.domain)?;
        Ok(Self::from_parts(
            self.domain.clone(),
            &self.u_r - &other.u_r,
            &self.u_theta - &other.u_theta,
        ))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &VectorField) -> Result<Self> {
        check_same(&self.domain, &other.domain)?;
        let mut u_r = self.u_r.clone();
        let mut u_theta = self.u_theta.clone();
        u_r.scaled_add(c, &other.u_r);
        u_theta.scaled_add(c, &other.u_theta);
        Ok(Self::from_parts(self.domain.clone(), u_r, u_theta))
    }

    /// L2(Omega) inner product.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        check_same(&self.domain, &other.domain)?;
        let mut dot = Array2::zeros(self.domain.shape());
        Zip::from(&mut dot)
            .and(&self.u_r)
            .and(&self.u_theta)
            .and(&other.u_r)
            .and(&other.u_theta)
            .for_each(|d, &a, &b, &c, &e| *d = a * c + b * e);
        self.domain.integrate(dot.view())
    }

    pub fn l2(&self) -> f64 {
        lp_norm(self, 2.0).expect("p = 2 is valid")
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn curl(&self) -> ScalarField {
        curl(self)
    }

    pub fn divergence(&self) -> ScalarField {
        divergence(self)
    }

    /// `v . n` at every node of a component.
    pub fn normal_trace(&self, side: Side) -> Vec<f64> {
        let c = self.domain.component(side);
        self.u_r
            .row(c.radial_index)
            .iter()
            .map(|v| c.normal_sign() * v)
            .collect()
    }

    /// `v . tau` at every node of a component.
    pub fn tangential_trace(&self, side: Side) -> Vec<f64> {
        let c = self.domain.component(side);
        self.u_theta
            .row(c.radial_index)
            .iter()
            .map(|v| c.tangent_sign() * v)
            .collect()
    }

    pub fn max_normal_trace(&self) -> f64 {
        [Side::Inner, Side::Outer]
            .iter()
            .flat_map(|&s| self.normal_trace(s))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Counter-clockwise circulation `oint u . e_theta ds` around one circle.
    pub fn circulation(&self, side: Side) -> f64 {
        let c = self.domain.component(side);
        c.weight() * self.u_theta.row(c.radial_index).sum()
    }

    /// `||v||_{L2(Gamma)}` over both boundary components.
    pub fn boundary_l2(&self) -> f64 {
        self.domain
            .components()
            .iter()
            .map(|c| {
                let j = c.radial_index;
                let s: f64 = self
                    .u_r
                    .row(j)
                    .iter()
                    .zip(self.u_theta.row(j))
                    .map(|(a, b)| a * a + b * b)
                    .sum();
                c.weight() * s
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Orthonormal-frame components of the velocity gradient:
    /// `[d_r u_r, (d_theta u_r - u_theta)/r, d_r u_theta, (d_theta u_theta + u_r)/r]`.
    pub fn gradient_components(&self) -> [Array2<f64>; 4] {
        let d = &self.domain;
        let drr = d.radial.derivative(self.u_r.view());
        let drt = d.radial.derivative(self.u_theta.view());
        let mut g12 = d.theta.derivative(self.u_r.view());
        g12 -= &self.u_theta;
        scale_rows(&mut g12, &d.radii, |r| 1.0 / r);
        let mut g22 = d.theta.derivative(self.u_theta.view());
        g22 += &self.u_r;
        scale_rows(&mut g22, &d.radii, |r| 1.0 / r);
        [drr, g12, drt, g22]
    }

    /// Pointwise Frobenius norm of the velocity gradient.
    pub fn gradient_magnitude(&self) -> Array2<f64> {
        let [a, b, c, e] = self.gradient_components();
        let mut m = Array2::zeros(self.domain.shape());
        Zip::from(&mut m)
            .and(&a)
            .and(&b)
            .and(&c)
            .and(&e)
            .for_each(|m, a, b, c, e| *m = (a * a + b * b + c * c + e * e).sqrt());
        m
    }

    pub fn gradient_lp(&self, p: f64) -> Result<f64> {
        norm_of(&self.domain, self.gradient_magnitude().view(), p)
    }

    /// Writes `r,theta,u_r,u_theta` rows, radius-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,theta,u_r,u_theta")?;
        for ((j, k), ur) in self.u_r.indexed_iter() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.domain.radii[j],
                self.domain.thetas[k],
                ur,
                self.u_theta[[j, k]]
            )?;
        }
        Ok(())
    }
}

fn check_same(a: &AnnulusDomain, b: &AnnulusDomain) -> Result<()> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: a.shape(),
            got: b.shape(),
        })
    }
}

/// Fields with a pointwise magnitude, for `L^p` norms.
pub trait PointwiseMagnitude {
    fn grid(&self) -> &AnnulusDomain;
    fn magnitude(&self) -> Array2<f64>;
}

impl PointwiseMagnitude for ScalarField {
    fn grid(&self) -> &AnnulusDomain {
        &self.domain
    }

    fn magnitude(&self) -> Array2<f64> {
        self.values.mapv(f64::abs)
    }
}

impl PointwiseMagnitude for VectorField {
    fn grid(&self) -> &AnnulusDomain {
        &self.domain
    }

    fn magnitude(&self) -> Array2<f64> {
        let mut m = Array2::zeros(self.domain.shape());
        Zip::from(&mut m)
            .and(&self.u_r)
            .and(&self.u_theta)
            .for_each(|m, &a, &b| *m = a.hypot(b));
        m
    }
}

/// Quadrature-weighted `L^p(Omega)` norm; `p = f64::INFINITY` gives the nodal maximum.
pub fn lp_norm<F: PointwiseMagnitude + ?Sized>(f: &F, p: f64) -> Result<f64> {
    norm_of(f.grid(), f.magnitude().view(), p)
}

fn norm_of(domain: &AnnulusDomain, m: ArrayView2<f64>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("norm exponent {p} is below 1")));
    }
    let max = m.iter().fold(0.0f64, |a, &b| a.max(b));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let scaled = m.mapv(|v| (v / max).powf(p));
    Ok(max * domain.integrate(scaled.view())?.powf(1.0 / p))
}

/// `(1/r) (d_r(r u_theta) - d_theta u_r)`.
pub fn curl(v: &VectorField) -> ScalarField {
    let d = v.domain_arc().clone();
    let mut ru = v.u_theta.clone();
    scale_rows(&mut ru, &d.radii, |r| r);
    let mut out = d.radial.derivative(ru.view());
    out -= &d.theta.derivative(v.u_r.view());
    scale_rows(&mut out, &d.radii, |r| 1.0 / r);
    ScalarField::from_parts(d, out)
}

/// `(1/r) d_r(r u_r) + (1/r) d_theta u_theta`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let d = v.domain_arc().clone();
    let mut ru = v.u_r.clone();
    scale_rows(&mut ru, &d.radii, |r| r);
    let mut out = d.radial.derivative(ru.view());
    out += &d.theta.derivative(v.u_theta.view());
    scale_rows(&mut out, &d.radii, |r| 1.0 / r);
    ScalarField::from_parts(d, out)
}

pub(crate) fn scale_rows(a: &mut Array2<f64>, radii: &[f64], f: impl Fn(f64) -> f64) {
    for (mut row, &r) in a.outer_iter_mut().zip(radii) {
        let s = f(r);
        row.mapv_inplace(|v| v * s);
    }
}

/// Coefficients `(sub, diag, sup)` of the compact radial part of the
/// Laplacian at row `j`, before the `-m^2 / r^2` angular term.
pub(crate) fn compact_radial_coeffs(h: f64, r: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    (1.0 / h2 - 0.5 / (h * r), -2.0 / h2, 1.0 / h2 + 0.5 / (h * r))
}

/// Discrete Laplacian matching the Poisson solver in the interior; the two
/// wall rows use one-sided second differences.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let d = f.domain_arc().clone();
    let v = f.values();
    let (n_r, _) = d.shape();
    let h = d.dr;
    let mut out = d.theta.second_derivative(v.view());
    scale_rows(&mut out, &d.radii, |r| 1.0 / (r * r));
    for j in 1..n_r - 1 {
        let (lo, mid, hi) = compact_radial_coeffs(h, d.radii[j]);
        let mut row = out.row_mut(j);
        row.scaled_add(lo, &v.row(j - 1));
        row.scaled_add(mid, &v.row(j));
        row.scaled_add(hi, &v.row(j + 1));
    }
    let dfr = d.radial.derivative(v.view());
    let h2 = h * h;
    for (j, step) in [(0usize, 1isize), (n_r - 1, -1)] {
        let at = |i: isize| v.row((j as isize + step * i) as usize);
        let mut row = out.row_mut(j);
        row.scaled_add(2.0 / h2, &at(0));
        row.scaled_add(-5.0 / h2, &at(1));
        row.scaled_add(4.0 / h2, &at(2));
        row.scaled_add(-1.0 / h2, &at(3));
        row.scaled_add(1.0 / d.radii[j], &dfr.row(j));
    }
    ScalarField::from_parts(d, out)
}

/// `D(v) n . tau` at the nodes of one boundary component.
pub fn strain_normal_tangent(
    v: &VectorField,
    comp: &BoundaryComponent,
    tol: f64,
) -> Result<Vec<f64>> {
    let max = v
        .normal_trace(comp.side)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if max > tol {
        return Err(Error::NormalTrace { max, tol });
    }
    let d = v.domain();
    let idx = match comp.side {
        Side::Inner => 0,
        Side::Outer => 1,
    };
    let row = &d.radial.one_sided_rows()[idx];
    let j = comp.radial_index;
    let r = comp.radius;
    let dth_ur = d.theta.derivative(v.u_r.view());
    // With n = s e_r and tau = s e_theta the sign s cancels: D n . tau = D_{r theta}.
    Ok((0..comp.len())
        .map(|k| {
            let dr_ut = RadialOps::eval_row(row, |i| v.u_theta[[i, k]]);
            0.5 * (dr_ut - v.u_theta[[j, k]] / r + dth_ur[[j, k]] / r)
        })
        .collect())
}

/// Max over both components of `|D(v) n . tau - omega / 2 + kappa v . tau|`.
pub fn check_strain_identity(v: &VectorField) -> Result<f64> {
    check_strain_identity_with_tol(v, NORMAL_TRACE_TOL)
}

pub fn check_strain_identity_with_tol(v: &VectorField, tol: f64) -> Result<f64> {
    let omega = curl(v);
    let mut worst = 0.0f64;
    for comp in v.domain().components() {
        let strain = strain_normal_tangent(v, comp, tol)?;
        let tangential = v.tangential_trace(comp.side);
        let wall = omega.values().row(comp.radial_index);
        for k in 0..comp.len() {
            let res = strain[k] - 0.5 * wall[k] + comp.curvature * tangential[k];
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

pub const DIAGNOSTIC_EXPONENTS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// Ratios for one sample. `yudovich` is `None` for samples carrying a
/// nonzero internal flux, where the gradient bound does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRatios {
    pub yudovich: Option<[f64; 4]>,
    pub trace: f64,
    pub ladyzhenskaya: f64,
    pub poincare: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCeilings {
    pub yudovich: f64,
    pub trace: f64,
    pub ladyzhenskaya: f64,
    pub poincare: f64,
}

impl Default for RatioCeilings {
    fn default() -> Self {
        Self {
            yudovich: 5.0,
            trace: 5.0,
            ladyzhenskaya: 5.0,
            poincare: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub samples: Vec<SampleRatios>,
    pub max_yudovich: f64,
    pub max_trace: f64,
    pub max_ladyzhenskaya: f64,
    pub max_poincare: f64,
}

impl InequalityReport {
    /// Names of ratio families exceeding their ceiling.
    pub fn violations(&self, ceilings: &RatioCeilings) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.max_yudovich > ceilings.yudovich {
            out.push("yudovich");
        }
        if self.max_trace > ceilings.trace {
            out.push("trace");
        }
        if self.max_ladyzhenskaya > ceilings.ladyzhenskaya {
            out.push("ladyzhenskaya");
        }
        if self.max_poincare > ceilings.poincare {
            out.push("poincare");
        }
        out
    }
}

/// Ratio diagnostics for the functional inequalities used by the theory.
pub fn inequality_diagnostics(samples: &[VectorField]) -> Result<InequalityReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples supplied".into()));
    }
    let mut rows = Vec::with_capacity(samples.len());
    for v in samples {
        let grad_l2 = v.gradient_lp(2.0)?;
        let l2 = v.l2();
        let scale = l2.max(grad_l2).max(f64::MIN_POSITIVE);
        let normal = v.max_normal_trace();
        if normal > NORMAL_TRACE_TOL * scale.max(1.0) {
            return Err(Error::NormalTrace {
                max: normal,
                tol: NORMAL_TRACE_TOL,
            });
        }
        let div = v.divergence().l2();
        if div > 1e-3 * grad_l2.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence {
                max: div,
                tol: 1e-3 * grad_l2,
            });
        }
        let omega = v.curl();
        let flux: f64 = {
            let w = v.domain().radial.weights();
            (0..v.domain().n_r).map(|j| w[j] * v.u_theta[[j, 0]]).sum()
        };
        let zero_flux = flux.abs() <= 1e-8 * scale;
        let interp = (l2 * grad_l2).sqrt();
        let mut yud = [0.0; 4];
        let mut poincare = [0.0; 4];
        for (i, &p) in DIAGNOSTIC_EXPONENTS.iter().enumerate() {
            let gp = v.gradient_lp(p)?;
            yud[i] = gp / (p * omega.lp_norm(p)? + l2);
            poincare[i] = v.lp_norm(p)? / gp;
        }
        rows.push(SampleRatios {
            yudovich: zero_flux.then_some(yud),
            trace: v.boundary_l2() / interp,
            ladyzhenskaya: v.lp_norm(4.0)? / interp,
            poincare,
        });
    }
    let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    Ok(InequalityReport {
        max_yudovich: fold(&mut rows.iter().filter_map(|r| r.yudovich).flatten()),
        max_trace: fold(&mut rows.iter().map(|r| r.trace)),
        max_ladyzhenskaya: fold(&mut rows.iter().map(|r| r.ladyzhenskaya)),
        max_poincare: fold(&mut rows.iter().flat_map(|r| r.poincare)),
        samples: rows,
    })
}
