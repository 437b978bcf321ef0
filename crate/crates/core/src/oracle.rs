//! Chebyshev collocation solver for radially symmetric viscous flow in an
//! annulus with Navier walls. For `omega = omega(r)` advection vanishes and
//! the dynamics reduce to
//!
//! ```text
//! omega_t = nu (omega_rr + omega_r / r),   Gamma' = 2 pi a nu omega_r(a),
//! omega(a) = s_a Gamma / (2 pi a),         omega(b) = s_b Gamma_out / (2 pi b),
//! ```
//!
//! with `Gamma_out = Gamma + 2 pi int_a^b omega r dr`, `s_a = 2/a + alpha_a`
//! and `s_b = 2/b - alpha_b`. The linear system is propagated exactly with a
//! matrix exponential. Nothing here shares code with the 2D solver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RadialOracle {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // nodal omega (all nodes) from the unknowns (interior omega, Gamma)
    expand: DMatrix<f64>,
    generator: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct RadialSnapshot {
    pub t: f64,
    pub values: Vec<f64>,
    pub circulation: f64,
    nodes: Vec<f64>,
}

fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).cos()).collect();
    let c = |i: usize| {
        let base = if i == 0 || i == n { 2.0 } else { 1.0 };
        if i % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (x, d)
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let theta: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
    let mut w = vec![0.0; n + 1];
    let mut v = vec![1.0; n.saturating_sub(1)];
    let nf = n as f64;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}

impl RadialOracle {
    /// `alpha = [inner, outer]` friction; `n` Chebyshev intervals.
    pub fn new(a: f64, b: f64, nu: f64, alpha: [f64; 2], n: usize) -> Result<Self> {
        if !(a > 0.0 && b > a) || n < 4 || nu < 0.0 {
            return Err(Error::InvalidArgument("radial oracle parameters".into()));
        }
        let (x, dx) = chebyshev(n);
        // node 0 at r = a, node n at r = b
        let half = 0.5 * (b - a);
        let nodes: Vec<f64> = x.iter().map(|xi| a + half * (1.0 - xi)).collect();
        let dr = dx * (-1.0 / half);
        let weights: Vec<f64> = clenshaw_curtis(n).iter().map(|w| w * half).collect();
        let s_a = 2.0 / a + alpha[0];
        let s_b = 2.0 / b - alpha[1];

        // unknowns: omega at nodes 1..n-1, then Gamma
        let m = n; // (n - 1) interior values + 1 circulation
        let mut expand = DMatrix::zeros(n + 1, m);
        for i in 1..n {
            expand[(i, i - 1)] = 1.0;
        }
        expand[(0, m - 1)] = s_a / (2.0 * PI * a);
        let denom = 1.0 - s_b * weights[n];
        if denom.abs() < 1e-12 {
            return Err(Error::Singular("outer wall closure of the radial oracle".into()));
        }
        let scale = s_b / (2.0 * PI * b) / denom;
        for col in 0..m {
            let mut v = 2.0 * PI * weights[0] * a * expand[(0, col)];
            if col < n - 1 {
                v += 2.0 * PI * weights[col + 1] * nodes[col + 1];
            } else {
                v += 1.0;
            }
            expand[(n, col)] = scale * v;
        }

        let lap = {
            let d2 = &dr * &dr;
            let inv_r = DMatrix::from_diagonal(&DVector::from_iterator(
                n + 1,
                nodes.iter().map(|r| 1.0 / r),
            ));
            d2 + inv_r * &dr
        };
        let full = &lap * &expand;
        let wall = &dr * &expand;
        let mut generator = DMatrix::zeros(m, m);
        for i in 1..n {
            for col in 0..m {
                generator[(i - 1, col)] = nu * full[(i, col)];
            }
        }
        for col in 0..m {
            generator[(m - 1, col)] = nu * 2.0 * PI * a * wall[(0, col)];
        }
        Ok(Self {
            nodes,
            weights,
            expand,
            generator,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `int_a^b f r dr` from nodal values.
    pub fn radial_moment(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .zip(&self.nodes)
            .map(|((v, w), r)| v * w * r)
            .sum()
    }

    /// Solution at each of the increasing `times`, starting from
    /// `omega0` (interior values are sampled; wall values follow from the
    /// closure) and inner circulation `gamma0` at `t = 0`.
    pub fn solve(&self, omega0: impl Fn(f64) -> f64, gamma0: f64, times: &[f64]) -> Result<Vec<RadialSnapshot>> {
        let n = self.nodes.len() - 1;
        let mut y = DVector::from_iterator(
            n,
            self.nodes[1..n]
                .iter()
                .map(|&r| omega0(r))
                .chain(std::iter::once(gamma0)),
        );
        let mut t_prev = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < t_prev {
                return Err(Error::InvalidArgument("oracle times must increase".into()));
            }
            if t > t_prev {
                let prop = (&self.generator * (t - t_prev)).exp();
                y = prop * y;
            }
            t_prev = t;
            let w = &self.expand * &y;
            out.push(RadialSnapshot {
                t,
                values: w.iter().copied().collect(),
                circulation: y[n - 1],
                nodes: self.nodes.clone(),
            });
        }
        Ok(out)
    }
}

impl RadialSnapshot {
    /// Barycentric interpolation at radius `r`.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.nodes.len() - 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (&ri, &vi)) in self.nodes.iter().zip(&self.values).enumerate() {
            let diff = r - ri;
            if diff == 0.0 {
                return vi;
            }
            let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == n {
                w *= 0.5;
            }
            num += w * vi / diff;
            den += w / diff;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64) -> f64 {
        let s = (r - 1.5) / 0.4;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    #[test]
    fn quadrature_and_interpolation() {
        let o = RadialOracle::new(1.0, 2.0, 0.1, [1.0, 1.0], 24).unwrap();
        let vals: Vec<f64> = o.nodes().iter().map(|r| r * r).collect();
        assert!((o.radial_moment(&vals) - 3.75).abs() < 1e-12);
        let snap = RadialSnapshot {
            t: 0.0,
            values: o.nodes().iter().map(|r| r.sin()).collect(),
            circulation: 0.0,
            nodes: o.nodes().to_vec(),
        };
        assert!((snap.eval(1.234) - 1.234f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn lions_point_vortex_is_steady() {
        let o = RadialOracle::new(1.0, 2.0, 0.05, [-2.0, 1.0], 16).unwrap();
        let s = o.solve(|_| 0.0, 2.0 * PI, &[0.5]).unwrap();
        assert!(s[0].values.iter().all(|v| v.abs() < 1e-12));
        assert!((s[0].circulation - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn resolution_independent() {
        let times = [0.25, 0.5];
        let coarse = RadialOracle::new(1.0, 2.0, 0.05, [1.0, 1.0], 128)
            .unwrap()
            .solve(bump, 0.0, &times)
            .unwrap();
        let fine = RadialOracle::new(1.0, 2.0, 0.05, [1.0, 1.0], 160)
            .unwrap()
            .solve(bump, 0.0, &times)
            .unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            assert!((c.circulation - f.circulation).abs() < 1e-7);
            for r in [1.0, 1.3, 1.77, 2.0] {
                assert!((c.eval(r) - f.eval(r)).abs() < 1e-7);
            }
        }
        assert!(fine[1].circulation.abs() > 1e-3);
    }

    #[test]
    fn outer_wall_value_follows_closure() {
        let (a, b) = (1.0, 2.0);
        let alpha = [0.5, 3.0];
        let o = RadialOracle::new(a, b, 0.02, alpha, 32).unwrap();
        let s = &o.solve(bump, 0.3, &[0.2]).unwrap()[0];
        let n = s.values.len() - 1;
        let gamma_out = s.circulation + 2.0 * PI * o.radial_moment(&s.values);
        assert!((s.values[n] - (2.0 / b - alpha[1]) * gamma_out / (2.0 * PI * b)).abs() < 1e-12);
        assert!((s.values[0] - (2.0 / a + alpha[0]) * s.circulation / (2.0 * PI * a)).abs() < 1e-12);
    }
}
