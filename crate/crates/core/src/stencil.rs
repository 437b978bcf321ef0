//! Radial finite-difference operators on a uniform grid.
//!
//! The first-derivative operator is the five-point centred stencil in the
//! interior. The two rows nearest each wall use the same stencil applied to
//! ghost values extrapolated by the degree-5 polynomial through the six
//! nearest grid values, so the leading truncation term is the same smooth
//! expression everywhere and composed operators keep a clean error expansion.
//!
//! The radial quadrature is the unique (modulo the odd-even null mode)
//! weight vector `q` with `q . (D f) = f[N] - f[0]` for every grid function
//! `f`. Line integrals of derivatives therefore telescope exactly, which is
//! what makes discrete fluxes of `D psi` equal to streamfunction differences.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// One sparse row: `(column, weight)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

const CENTRED: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const GHOST_DEGREE: usize = 5;

/// Lagrange interpolation weights for evaluating at `x` from values at `nodes`.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &xk)| (x - xk) / (xi - xk))
                .product()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RadialOps {
    n: usize,
    h: f64,
    d1: Vec<SparseRow>,
    d2: Vec<SparseRow>,
    one_sided: [SparseRow; 2],
    weights: Vec<f64>,
}

impl RadialOps {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < GHOST_DEGREE + 3 {
            return Err(Error::InvalidDomain(format!(
                "radial node count {n} is below the minimum of {}",
                GHOST_DEGREE + 3
            )));
        }
        let d1 = build_first_derivative(n, h);
        let d2 = build_second_derivative(n, h);
        let last = n - 1;
        let one_sided = [
            vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)],
            vec![(last, 1.5 / h), (last - 1, -2.0 / h), (last - 2, 0.5 / h)],
        ];
        let weights = compatible_quadrature(&d1, n, h)?;
        Ok(Self {
            n,
            h,
            d1,
            d2,
            one_sided,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Rows of the first-derivative operator.
    pub fn first_derivative_rows(&self) -> &[SparseRow] {
        &self.d1
    }

    /// Rows of the fourth-order second-derivative operator.
    pub fn second_derivative_rows(&self) -> &[SparseRow] {
        &self.d2
    }

    /// Second-order one-sided first-derivative stencils at `[inner, outer]`.
    pub fn one_sided_rows(&self) -> &[SparseRow; 2] {
        &self.one_sided
    }

    /// Radial line-integral weights (length-weighted, no `r` factor).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the first-derivative operator along axis 0 of `f`.
    pub fn derivative(&self, f: ArrayView2<f64>) -> Array2<f64> {
        apply_rows(&self.d1, f)
    }

    /// First derivative of a single radial profile.
    pub fn derivative_1d(&self, f: &[f64]) -> Vec<f64> {
        self.d1
            .iter()
            .map(|row| row.iter().map(|&(k, w)| w * f[k]).sum())
            .collect()
    }

    /// Evaluates one sparse row against a column accessor.
    pub fn eval_row(row: &SparseRow, f: impl Fn(usize) -> f64) -> f64 {
        row.iter().map(|&(k, w)| w * f(k)).sum()
    }
}

fn build_second_derivative(n: usize, h: f64) -> Vec<SparseRow> {
    const CENTRED: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    const WALL: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    const NEAR: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let s = 1.0 / (12.0 * h * h);
    let last = n - 1;
    (0..n)
        .map(|j| match j {
            0 => WALL.iter().enumerate().map(|(i, w)| (i, w * s)).collect(),
            1 => NEAR.iter().enumerate().map(|(i, w)| (i, w * s)).collect(),
            _ if j == last => WALL.iter().enumerate().map(|(i, w)| (last - i, w * s)).collect(),
            _ if j == last - 1 => NEAR.iter().enumerate().map(|(i, w)| (last - i, w * s)).collect(),
            _ => CENTRED.iter().enumerate().map(|(i, w)| (j + i - 2, w * s)).collect(),
        })
        .collect()
}

fn build_first_derivative(n: usize, h: f64) -> Vec<SparseRow> {
    let last = n - 1;
    let left_nodes: Vec<f64> = (0..=GHOST_DEGREE).map(|k| k as f64).collect();
    let right_nodes: Vec<f64> = (0..=GHOST_DEGREE).map(|k| (last - k) as f64).collect();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let mut dense = vec![0.0; n];
        for &(off, w) in CENTRED.iter() {
            let k = j as isize + off;
            let w = w / (12.0 * h);
            if k < 0 {
                for (i, g) in lagrange_weights(&left_nodes, k as f64).into_iter().enumerate() {
                    dense[i] += w * g;
                }
            } else if k as usize > last {
                for (i, g) in lagrange_weights(&right_nodes, k as f64).into_iter().enumerate() {
                    dense[last - i] += w * g;
                }
            } else {
                dense[k as usize] += w;
            }
        }
        rows.push(
            dense
                .into_iter()
                .enumerate()
                .filter(|&(_, w)| w != 0.0)
                .collect(),
        );
    }
    rows
}

fn compatible_quadrature(d1: &[SparseRow], n: usize, h: f64) -> Result<Vec<f64>> {
    // D^T q = e_N - e_0 has a one-dimensional (odd-even) null space; one
    // equation is redundant, so it is replaced by a pin at the mid node.
    let mid = n / 2;
    let mut mat = DMatrix::<f64>::zeros(n, n);
    for (j, row) in d1.iter().enumerate() {
        for &(k, w) in row {
            if k != mid {
                mat[(k, j)] += w;
            }
        }
    }
    mat[(mid, mid)] = 1.0;
    let lu = mat.lu();

    let mut rhs = DVector::<f64>::zeros(n);
    rhs[0] = -1.0;
    rhs[n - 1] = 1.0;
    rhs[mid] = h;
    let particular = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("radial quadrature system".into()))?;
    let mut pin = DVector::<f64>::zeros(n);
    pin[mid] = 1.0;
    let null = lu
        .solve(&pin)
        .ok_or_else(|| Error::Singular("radial quadrature null mode".into()))?;

    // Remove the odd-even component by staying closest to the trapezoid rule.
    let trapezoid: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h })
        .collect();
    let num: f64 = (0..n).map(|j| (particular[j] - trapezoid[j]) * null[j]).sum();
    let den: f64 = null.iter().map(|z| z * z).sum();
    let t = -num / den;
    Ok((0..n).map(|j| particular[j] + t * null[j]).collect())
}

/// Applies sparse rows along axis 0: `out[j, :] = sum_k w_jk f[k, :]`.
pub fn apply_rows(rows: &[SparseRow], f: ArrayView2<f64>) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros(f.raw_dim());
    for (j, row) in rows.iter().enumerate() {
        let mut target = out.row_mut(j);
        for &(k, w) in row {
            target.scaled_add(w, &f.row(k));
        }
    }
    out
}

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored. Works on any field type that supports
/// the needed arithmetic (real or complex right-hand sides).
pub fn solve_tridiagonal<T>(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[T]) -> Result<Vec<T>>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d: Vec<T> = Vec::with_capacity(n);
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    c[0] = if n > 1 { sup[0] / denom } else { 0.0 };
    d.push(rhs[0] * (1.0 / denom));
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        let prev = d[i - 1];
        d.push((rhs[i] - prev * sub[i]) * (1.0 / denom));
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] = d[i] - next * c[i];
    }
    Ok(d)
}

/// Pre-factored tridiagonal matrix for repeated solves with the same operator.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    c: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Tridiagonal {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        for i in 0..n {
            let denom = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * c[i - 1]
            };
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Singular("zero pivot in tridiagonal factorisation".into()));
            }
            inv_denom[i] = 1.0 / denom;
            if i + 1 < n {
                c[i] = sup[i] * inv_denom[i];
            }
        }
        Ok(Self {
            sub: sub.to_vec(),
            c,
            inv_denom,
        })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn solve_in_place<T>(&self, x: &mut [T])
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let n = self.c.len();
        x[0] = x[0] * self.inv_denom[0];
        for i in 1..n {
            let prev = x[i - 1];
            x[i] = (x[i] - prev * self.sub[i]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] = x[i] - next * self.c[i];
        }
    }
}
