//! Second-order IMEX stepping: Heun for advection, Crank-Nicolson for
//! diffusion. With friction uniform along each circle the wall vorticity,
//! the wall velocity and (for the mean mode) the circulation are solved
//! together with the implicit diffusion step, one small dense system per
//! Fourier mode. Friction varying along a wall couples modes, so the wall
//! values entering the implicit solve are then taken from the current stage.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, Matrix2, Matrix3, Vector2, Vector3, LU};
use ndarray::{Array2, ArrayView1};
use rustfft::num_complex::Complex64;

use super::{inner_wall_flux, BCSpec, DiffusionScheme, SimState, StepParams, VelocityMap};
use crate::error::{Error, Result};
use crate::field::{laplacian, ScalarField, VectorField};
use crate::geometry::AnnulusDomain;
use crate::stencil::SparseRow;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
enum WallRule {
    Navier([Vec<f64>; 2]),
    NoSlip,
}

#[derive(Debug, Clone)]
enum Scheme {
    Euler,
    Coupled,
    Lagged([Vec<f64>; 2]),
    Explicit(WallRule),
}

#[derive(Debug, Clone)]
enum ModeClosure {
    Two(Matrix2<f64>),
    Three(Matrix3<f64>),
    Lagged,
}

/// Per-mode Crank-Nicolson data and wall responses.
#[derive(Debug, Clone)]
struct ModeData {
    // diffusion operator rows for interior nodes, indexed over all nodes
    rows: Vec<SparseRow>,
    cn: LU<f64, Dyn, Dyn>,
    // interior response to a unit wall value at the inner / outer wall
    y_l: Vec<f64>,
    y_r: Vec<f64>,
    closure: ModeClosure,
}

#[derive(Debug, Clone)]
pub struct Stepper {
    domain: Arc<AnnulusDomain>,
    map: VelocityMap,
    bc: BCSpec,
    nu: f64,
    params: StepParams,
    scheme: Scheme,
    walls: Option<[f64; 2]>,
    modes: Vec<ModeData>,
}

/// Fourth-order rows of `d_rr + d_r / r - m^2 / r^2` at the interior nodes.
fn diffusion_rows(d: &AnnulusDomain, m: f64) -> Vec<SparseRow> {
    let d1 = d.radial.first_derivative_rows();
    let d2 = d.radial.second_derivative_rows();
    (1..d.n_r - 1)
        .map(|j| {
            let r = d.radii[j];
            let mut row: Vec<(usize, f64)> = d2[j].clone();
            row.extend(d1[j].iter().map(|&(k, w)| (k, w / r)));
            row.push((j, -m * m / (r * r)));
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (k, w) in row {
                match merged.last_mut() {
                    Some(e) if e.0 == k => e.1 += w,
                    _ => merged.push((k, w)),
                }
            }
            merged
        })
        .collect()
}

fn solve_real(lu: &LU<f64, Dyn, Dyn>, x: &mut [f64]) {
    let mut b = DMatrix::from_column_slice(x.len(), 1, x);
    lu.solve_mut(&mut b);
    x.copy_from_slice(b.as_slice());
}

fn solve_complex(lu: &LU<f64, Dyn, Dyn>, x: &mut [Complex64]) {
    let n = x.len();
    let mut b = DMatrix::from_fn(n, 2, |i, j| if j == 0 { x[i].re } else { x[i].im });
    lu.solve_mut(&mut b);
    for (i, v) in x.iter_mut().enumerate() {
        *v = Complex64::new(b[(i, 0)], b[(i, 1)]);
    }
}

fn uniform(a: &[f64]) -> Option<f64> {
    let first = *a.first()?;
    a.iter().all(|&x| x == first).then_some(first)
}

/// Applies a derivative row to a vector whose wall entries are zero.
fn eval_full(row: &[(usize, f64)], interior: &[f64], last: usize) -> f64 {
    row.iter()
        .filter(|&&(i, _)| i != 0 && i != last)
        .map(|&(i, w)| w * interior[i - 1])
        .sum()
}

fn eval_full_c(row: &[(usize, f64)], interior: &[Complex64], last: usize) -> Complex64 {
    row.iter().fold(ZERO, |acc, &(i, w)| {
        if i == 0 || i == last {
            acc
        } else {
            acc + interior[i - 1] * w
        }
    })
}

impl Stepper {
    pub fn new(domain: Arc<AnnulusDomain>, bc: BCSpec, nu: f64, params: StepParams) -> Result<Self> {
        params.validate()?;
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity {nu} must be non-negative")));
        }
        let nu = if bc == BCSpec::Euler { 0.0 } else { nu };
        if bc == BCSpec::NoSlip && nu == 0.0 {
            return Err(Error::InvalidArgument("no-slip walls need positive viscosity".into()));
        }
        let map = VelocityMap::new(domain.clone())?;
        let friction = bc.friction(&domain)?;
        let scheme = match (&bc, params.diffusion) {
            (BCSpec::Euler, _) => Scheme::Euler,
            (BCSpec::NoSlip, DiffusionScheme::Explicit) => Scheme::Explicit(WallRule::NoSlip),
            (_, DiffusionScheme::Explicit) => Scheme::Explicit(WallRule::Navier(
                friction.clone().expect("Navier-type condition"),
            )),
            (BCSpec::NoSlip, DiffusionScheme::SemiImplicit) => Scheme::Coupled,
            (_, DiffusionScheme::SemiImplicit) => {
                let alpha = friction.clone().expect("Navier-type condition");
                if uniform(&alpha[0]).is_some() && uniform(&alpha[1]).is_some() {
                    Scheme::Coupled
                } else {
                    Scheme::Lagged(alpha)
                }
            }
        };
        if let Scheme::Explicit(_) = scheme {
            let h = domain.min_spacing();
            let number = nu * params.dt / (h * h);
            if number > 0.25 {
                return Err(Error::Cfl(format!(
                    "explicit diffusion number {number:.3} exceeds 0.25"
                )));
            }
        }
        // omega_wall = s * u_theta with these factors when friction is uniform
        let walls = friction.map(|a| {
            [
                2.0 / domain.r_inner + a[0][0],
                2.0 * domain.outer.curvature - a[1][0],
            ]
        });
        let mut stepper = Self {
            domain,
            map,
            bc,
            nu,
            params,
            scheme,
            walls,
            modes: Vec::new(),
        };
        if matches!(stepper.scheme, Scheme::Coupled | Scheme::Lagged(_)) {
            stepper.modes = (0..=stepper.domain.n_theta / 2)
                .map(|m| stepper.mode_data(m, walls))
                .collect::<Result<_>>()?;
        }
        Ok(stepper)
    }

    pub fn domain(&self) -> &Arc<AnnulusDomain> {
        &self.domain
    }

    pub fn velocity_map(&self) -> &VelocityMap {
        &self.map
    }

    pub fn bc(&self) -> &BCSpec {
        &self.bc
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn params(&self) -> StepParams {
        self.params
    }

    fn mode_data(&self, m: usize, walls: Option<[f64; 2]>) -> Result<ModeData> {
        let d = &self.domain;
        let ops = diffusion_rows(d, m as f64);
        let c = 0.5 * self.nu * self.params.dt;
        let last = d.n_r - 1;
        let n = last - 1;
        let mut a = DMatrix::<f64>::identity(n, n);
        let mut y_l = vec![0.0; n];
        let mut y_r = vec![0.0; n];
        for (i, row) in ops.iter().enumerate() {
            for &(k, w) in row {
                if k == 0 {
                    y_l[i] = c * w;
                } else if k == last {
                    y_r[i] = c * w;
                } else {
                    a[(i, k - 1)] -= c * w;
                }
            }
        }
        let cn = a.lu();
        if !cn.is_invertible() {
            return Err(Error::Singular(format!("diffusion operator for mode {m}")));
        }
        solve_real(&cn, &mut y_l);
        solve_real(&cn, &mut y_r);

        let rows = d.radial.first_derivative_rows();
        let solver = self.map.solver();
        let wall_velocity = |y: &[f64]| {
            let mut psi = y.to_vec();
            solver.solve_mode(m, &mut psi);
            (eval_full(&rows[0], &psi, last), eval_full(&rows[last], &psi, last))
        };
        let (ua_l, ub_l) = wall_velocity(&y_l);
        let (ua_r, ub_r) = wall_velocity(&y_r);
        let flux_scale = self.nu * 2.0 * PI * d.r_inner;
        let d0 = &rows[0];
        let flux_l = flux_scale
            * d0.iter()
                .map(|&(i, w)| if i == 0 { w } else { w * y_l[i - 1] })
                .sum::<f64>();
        let flux_r = flux_scale * eval_full(d0, &y_r, last);

        let rho = d.r_inner / d.r_outer;
        let half_dt = 0.5 * self.params.dt;
        let singular = || Error::Singular(format!("wall closure for mode {m}"));
        let closure = match (&self.scheme, walls) {
            (Scheme::Lagged(_), _) => ModeClosure::Lagged,
            (_, Some([sa, sb])) if m == 0 => {
                let mat = Matrix3::new(
                    1.0,
                    0.0,
                    -sa / (2.0 * PI * d.r_inner),
                    -sb * (ub_l - rho * ua_l),
                    1.0 - sb * (ub_r - rho * ua_r),
                    -sb / (2.0 * PI * d.r_outer),
                    -half_dt * flux_l,
                    -half_dt * flux_r,
                    1.0,
                );
                ModeClosure::Three(mat.try_inverse().ok_or_else(singular)?)
            }
            (_, Some([sa, sb])) => {
                let mat = Matrix2::new(1.0 - sa * ua_l, -sa * ua_r, -sb * ub_l, 1.0 - sb * ub_r);
                ModeClosure::Two(mat.try_inverse().ok_or_else(singular)?)
            }
            (_, None) if m == 0 => {
                let mat = Matrix2::new(flux_l, flux_r, ub_l - rho * ua_l, ub_r - rho * ua_r);
                ModeClosure::Two(mat.try_inverse().ok_or_else(singular)?)
            }
            (_, None) => {
                let mat = Matrix2::new(ua_l, ua_r, ub_l, ub_r);
                ModeClosure::Two(mat.try_inverse().ok_or_else(singular)?)
            }
        };
        Ok(ModeData {
            rows: ops,
            cn,
            y_l,
            y_r,
            closure,
        })
    }

    pub fn velocity(&self, state: &SimState) -> Result<VectorField> {
        self.map.velocity(&state.omega, state.circulation_inner)
    }

    /// Advective CFL number of a velocity field.
    pub fn cfl(&self, u: &VectorField) -> f64 {
        let umax = u
            .u_r()
            .iter()
            .zip(u.u_theta())
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
        umax * self.params.dt / self.domain.min_spacing()
    }

    fn check_cfl(&self, u: &VectorField) -> Result<()> {
        let cfl = self.cfl(u);
        if cfl > self.params.cfl_max || !cfl.is_finite() {
            return Err(Error::Cfl(format!(
                "advective CFL number {cfl:.4} exceeds {}",
                self.params.cfl_max
            )));
        }
        Ok(())
    }

    fn advection(&self, u: &VectorField, omega: &ScalarField) -> Array2<f64> {
        let d = &self.domain;
        let dr = d.radial.derivative(omega.values().view());
        let dth = d.theta.derivative(omega.values().view());
        let mut out = Array2::zeros(d.shape());
        for ((j, k), o) in out.indexed_iter_mut() {
            *o = u.u_r()[[j, k]] * dr[[j, k]] + u.u_theta()[[j, k]] / d.radii[j] * dth[[j, k]];
        }
        out
    }

    fn flux(&self, omega: &ScalarField) -> f64 {
        self.nu * 2.0 * PI * self.domain.r_inner * inner_wall_flux(&self.domain.radial, omega)
    }

    pub fn step(&self, state: &SimState) -> Result<SimState> {
        let u = self.velocity(state)?;
        self.step_from(state, &u)
    }

    /// One step given the velocity of `state`.
    pub fn step_from(&self, state: &SimState, u: &VectorField) -> Result<SimState> {
        if !self.domain.same_grid(state.omega.domain()) {
            return Err(Error::ShapeMismatch {
                expected: self.domain.shape(),
                got: state.omega.domain().shape(),
            });
        }
        self.check_cfl(u)?;
        let next = match &self.scheme {
            Scheme::Euler => self.step_euler(state, u),
            Scheme::Coupled => self.step_coupled(state, u),
            Scheme::Lagged(alpha) => self.step_lagged(state, u, alpha),
            Scheme::Explicit(rule) => self.step_explicit(state, u, rule),
        };
        let next = match next {
            Err(e @ Error::Cfl(_)) => return Err(e),
            other => other?,
        };
        if !next.is_finite() {
            return Err(Error::NonFinite {
                t: next.t,
                last_good: Box::new(state.clone()),
            });
        }
        Ok(next)
    }

    /// Runs `n_steps`, calling `observe` on the initial state and after each
    /// step with the state and its velocity.
    pub fn run<F>(&self, initial: &SimState, n_steps: usize, mut observe: F) -> Result<SimState>
    where
        F: FnMut(&SimState, &VectorField) -> Result<()>,
    {
        let mut state = initial.clone();
        let mut u = self.velocity(&state)?;
        observe(&state, &u)?;
        for _ in 0..n_steps {
            state = self.step_from(&state, &u)?;
            u = self.velocity(&state)?;
            observe(&state, &u)?;
        }
        Ok(state)
    }

    fn finish(&self, state: &SimState, omega: Array2<f64>, gamma: f64) -> SimState {
        SimState {
            omega: ScalarField::from_parts(self.domain.clone(), omega),
            circulation_inner: gamma,
            t: state.t + self.params.dt,
        }
    }

    fn step_euler(&self, state: &SimState, u: &VectorField) -> Result<SimState> {
        let dt = self.params.dt;
        let n0 = self.advection(u, &state.omega);
        let mut w1 = state.omega.values().clone();
        w1.scaled_add(-dt, &n0);
        let s1 = self.finish(state, w1, state.circulation_inner);
        let u1 = self.velocity(&s1)?;
        self.check_cfl(&u1)?;
        let n1 = self.advection(&u1, &s1.omega);
        let mut w2 = state.omega.values().clone();
        w2.scaled_add(-0.5 * dt, &n0);
        w2.scaled_add(-0.5 * dt, &n1);
        Ok(self.finish(state, w2, state.circulation_inner))
    }

    fn step_coupled(&self, state: &SimState, u: &VectorField) -> Result<SimState> {
        let theta = &self.domain.theta;
        let wn = theta.forward_rows(state.omega.values().view());
        let a1 = theta.forward_rows(self.advection(u, &state.omega).view());
        let fn_ = self.flux(&state.omega);
        let (w1, g1) = self.coupled_stage(&wn, &a1, state.circulation_inner, fn_);
        let s1 = self.finish(state, theta.inverse_rows(w1), g1);
        let u1 = self.velocity(&s1)?;
        self.check_cfl(&u1)?;
        let a2 = theta.forward_rows(self.advection(&u1, &s1.omega).view());
        let avg = (&a1 + &a2).mapv(|c| c * 0.5);
        let (w2, g2) = self.coupled_stage(&wn, &avg, state.circulation_inner, fn_);
        Ok(self.finish(state, theta.inverse_rows(w2), g2))
    }

    fn interior_rhs(&self, md: &ModeData, wn: ArrayView1<Complex64>, adv: ArrayView1<Complex64>) -> Vec<Complex64> {
        let c = 0.5 * self.nu * self.params.dt;
        let dt = self.params.dt;
        (1..self.domain.n_r - 1)
            .map(|j| {
                let lw = md.rows[j - 1].iter().fold(ZERO, |acc, &(k, w)| acc + wn[k] * w);
                wn[j] + lw * c - adv[j] * dt
            })
            .collect()
    }

    fn coupled_stage(
        &self,
        wn: &Array2<Complex64>,
        adv: &Array2<Complex64>,
        gamma_n: f64,
        flux_n: f64,
    ) -> (Array2<Complex64>, f64) {
        let d = &self.domain;
        let last = d.n_r - 1;
        let rows = d.radial.first_derivative_rows();
        let solver = self.map.solver();
        let rho = d.r_inner / d.r_outer;
        let half_dt = 0.5 * self.params.dt;
        let flux_scale = self.nu * 2.0 * PI * d.r_inner;
        let mut out = Array2::from_elem(wn.raw_dim(), ZERO);
        let mut gamma = gamma_n;
        let [sa, sb] = self.walls.unwrap_or([0.0, 0.0]);
        for k in 0..d.n_theta {
            let m = d.theta.wavenumber(k).abs() as usize;
            let md = &self.modes[m];
            let mut x = self.interior_rhs(md, wn.column(k), adv.column(k));
            solve_complex(&md.cn, &mut x);
            let mut psi = x.clone();
            solver.solve_mode(m, &mut psi);
            let ua = eval_full_c(&rows[0], &psi, last);
            let ub = eval_full_c(&rows[last], &psi, last);
            let (w0, wl) = match &md.closure {
                ModeClosure::Three(inv) => {
                    let flux_x = eval_full_c(&rows[0], &x, last).re * flux_scale;
                    let rhs = Vector3::new(
                        0.0,
                        sb * (ub.re - rho * ua.re),
                        gamma_n + half_dt * (flux_n + flux_x),
                    );
                    let sol = inv * rhs;
                    gamma = sol[2];
                    (Complex64::new(sol[0], 0.0), Complex64::new(sol[1], 0.0))
                }
                ModeClosure::Two(inv) => {
                    let (r0, r1) = if self.walls.is_some() {
                        (ua * sa, ub * sb)
                    } else if m == 0 {
                        let flux_x = eval_full_c(&rows[0], &x, last) * flux_scale;
                        (-flux_x, -(ub - ua * rho))
                    } else {
                        (-ua, -ub)
                    };
                    let re = inv * Vector2::new(r0.re, r1.re);
                    let im = inv * Vector2::new(r0.im, r1.im);
                    (Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1]))
                }
                ModeClosure::Lagged => unreachable!("coupled stage with lagged closure"),
            };
            let mut col = out.column_mut(k);
            col[0] = w0;
            col[last] = wl;
            for j in 1..last {
                col[j] = x[j - 1] + w0 * md.y_l[j - 1] + wl * md.y_r[j - 1];
            }
        }
        if self.bc == BCSpec::NoSlip {
            gamma = 0.0;
        }
        (out, gamma)
    }

    /// Interior Crank-Nicolson solve with prescribed wall values.
    fn dirichlet_stage(
        &self,
        wn: &Array2<Complex64>,
        adv: &Array2<Complex64>,
        walls: [&[Complex64]; 2],
    ) -> Array2<Complex64> {
        let d = &self.domain;
        let last = d.n_r - 1;
        let mut out = Array2::from_elem(wn.raw_dim(), ZERO);
        for k in 0..d.n_theta {
            let m = d.theta.wavenumber(k).abs() as usize;
            let md = &self.modes[m];
            let mut x = self.interior_rhs(md, wn.column(k), adv.column(k));
            solve_complex(&md.cn, &mut x);
            let (w0, wl) = (walls[0][k], walls[1][k]);
            let mut col = out.column_mut(k);
            col[0] = w0;
            col[last] = wl;
            for j in 1..last {
                col[j] = x[j - 1] + w0 * md.y_l[j - 1] + wl * md.y_r[j - 1];
            }
        }
        out
    }

    /// Overwrites the wall rows with the Navier relation for the velocity
    /// implied by the interior values and `gamma`; returns that velocity.
    fn impose_navier(&self, omega: &mut Array2<f64>, gamma: f64, alpha: &[Vec<f64>; 2]) -> Result<VectorField> {
        let field = ScalarField::from_parts(self.domain.clone(), omega.clone());
        let u = self.map.velocity(&field, gamma)?;
        let d = &self.domain;
        for (i, comp) in d.components().iter().enumerate() {
            let j = comp.radial_index;
            for k in 0..d.n_theta {
                let ut = comp.tangent_sign() * u.u_theta()[[j, k]];
                omega[[j, k]] = (2.0 * comp.curvature - alpha[i][k]) * ut;
            }
        }
        Ok(u)
    }

    fn step_lagged(&self, state: &SimState, u: &VectorField, alpha: &[Vec<f64>; 2]) -> Result<SimState> {
        let d = &self.domain;
        let theta = &d.theta;
        let dt = self.params.dt;
        let last = d.n_r - 1;
        let wn = theta.forward_rows(state.omega.values().view());
        let a1 = theta.forward_rows(self.advection(u, &state.omega).view());
        let fn_ = self.flux(&state.omega);

        let walls_n = [wn.row(0).to_vec(), wn.row(last).to_vec()];
        let w1 = self.dirichlet_stage(&wn, &a1, [&walls_n[0], &walls_n[1]]);
        let g1 = state.circulation_inner + dt * fn_;
        let mut omega1 = theta.inverse_rows(w1);
        let u1 = self.impose_navier(&mut omega1, g1, alpha)?;
        let s1 = self.finish(state, omega1, g1);
        self.check_cfl(&u1)?;

        let a2 = theta.forward_rows(self.advection(&u1, &s1.omega).view());
        let avg = (&a1 + &a2).mapv(|c| c * 0.5);
        let w1_hat = theta.forward_rows(s1.omega.values().view());
        let walls_1 = [w1_hat.row(0).to_vec(), w1_hat.row(last).to_vec()];
        let w2 = self.dirichlet_stage(&wn, &avg, [&walls_1[0], &walls_1[1]]);
        let g2 = state.circulation_inner + 0.5 * dt * (fn_ + self.flux(&s1.omega));
        let mut omega2 = theta.inverse_rows(w2);
        self.impose_navier(&mut omega2, g2, alpha)?;
        Ok(self.finish(state, omega2, g2))
    }

    fn explicit_tendency(&self, u: &VectorField, omega: &ScalarField) -> Array2<f64> {
        let mut t = laplacian(omega).into_values();
        t.mapv_inplace(|v| v * self.nu);
        t -= &self.advection(u, omega);
        t
    }

    fn impose_thom(&self, omega: &mut Array2<f64>) -> Result<VectorField> {
        let d = &self.domain;
        let field = ScalarField::from_parts(d.clone(), omega.clone());
        let sol = self.map.solver().solve(&field)?;
        let c = self.map.harmonic_coefficient(&sol.u0, 0.0);
        let u = sol.u0.add_scaled(c, &self.map.basis().grad_q)?;
        // streamfunction of c * grad_q is (c / Z) ln r
        let c_psi = c / self.map.basis().norm_constant;
        let psi = sol.psi.values();
        let total = |j: usize, k: usize| psi[[j, k]] + c_psi * d.radii[j].ln();
        let h2 = d.dr * d.dr;
        let last = d.n_r - 1;
        for k in 0..d.n_theta {
            omega[[0, k]] = 2.0 * (total(1, k) - total(0, k)) / h2;
            omega[[last, k]] = 2.0 * (total(last - 1, k) - total(last, k)) / h2;
        }
        Ok(u)
    }

    fn step_explicit(&self, state: &SimState, u: &VectorField, rule: &WallRule) -> Result<SimState> {
        let dt = self.params.dt;
        let t0 = self.explicit_tendency(u, &state.omega);
        let mut omega1 = state.omega.values().clone();
        omega1.scaled_add(dt, &t0);
        let fn_ = self.flux(&state.omega);
        let g1 = match rule {
            WallRule::Navier(_) => state.circulation_inner + dt * fn_,
            WallRule::NoSlip => 0.0,
        };
        let u1 = match rule {
            WallRule::Navier(alpha) => self.impose_navier(&mut omega1, g1, alpha)?,
            WallRule::NoSlip => self.impose_thom(&mut omega1)?,
        };
        let s1 = self.finish(state, omega1, g1);
        self.check_cfl(&u1)?;
        let t1 = self.explicit_tendency(&u1, &s1.omega);
        let mut omega2 = state.omega.values().clone();
        omega2.scaled_add(0.5 * dt, &t0);
        omega2.scaled_add(0.5 * dt, &t1);
        let g2 = match rule {
            WallRule::Navier(_) => state.circulation_inner + 0.5 * dt * (fn_ + self.flux(&s1.omega)),
            WallRule::NoSlip => 0.0,
        };
        match rule {
            WallRule::Navier(alpha) => self.impose_navier(&mut omega2, g2, alpha)?,
            WallRule::NoSlip => self.impose_thom(&mut omega2)?,
        };
        Ok(self.finish(state, omega2, g2))
    }
}
