//! Residual of the weak momentum identity
//! `d/dt (u, v) + ((u . grad) u, v) + nu (grad u, grad v) - nu int_Gamma (kappa - alpha) u . v = 0`.

use ndarray::{Array2, Zip};

use super::{BCSpec, SimState, VelocityMap};
use crate::error::{Error, Result};
use crate::field::{VectorField, NORMAL_TRACE_TOL};

/// Spatial terms of the identity for one velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakTerms {
    pub pairing: f64,
    pub convection: f64,
    pub viscous: f64,
    pub boundary: f64,
}

fn check_test_field(v: &VectorField) -> Result<()> {
    let normal = v.max_normal_trace();
    if normal > NORMAL_TRACE_TOL {
        return Err(Error::NormalTrace {
            max: normal,
            tol: NORMAL_TRACE_TOL,
        });
    }
    let div = v.divergence().l2();
    let tol = 1e-3 * v.gradient_lp(2.0)?.max(v.l2());
    if div > tol {
        return Err(Error::Divergence { max: div, tol });
    }
    Ok(())
}

/// `(u . grad) u` in polar components.
fn convective(u: &VectorField) -> (Array2<f64>, Array2<f64>) {
    let [g11, g12, g21, g22] = u.gradient_components();
    let (ur, ut) = (u.u_r(), u.u_theta());
    // g12 = (d_theta u_r - u_theta)/r and g22 = (d_theta u_theta + u_r)/r
    // already carry the frame-rotation terms.
    let mut cr = Array2::zeros(ur.raw_dim());
    let mut ct = Array2::zeros(ur.raw_dim());
    Zip::from(&mut cr)
        .and(&mut ct)
        .and(ur)
        .and(ut)
        .and(&g11)
        .and(&g12)
        .for_each(|cr, _, &a, &b, &x, &y| *cr = a * x + b * y);
    Zip::from(&mut ct)
        .and(ur)
        .and(ut)
        .and(&g21)
        .and(&g22)
        .for_each(|ct, &a, &b, &x, &y| *ct = a * x + b * y);
    (cr, ct)
}

pub fn weak_terms(u: &VectorField, v: &VectorField, nu: f64, alpha: Option<&[Vec<f64>; 2]>) -> Result<WeakTerms> {
    let d = u.domain();
    let pairing = u.inner(v)?;
    let (cr, ct) = convective(u);
    let conv = VectorField::from_parts(u.domain_arc().clone(), cr, ct);
    let convection = conv.inner(v)?;
    let gu = u.gradient_components();
    let gv = v.gradient_components();
    let mut dot = Array2::<f64>::zeros(d.shape());
    for (a, b) in gu.iter().zip(&gv) {
        Zip::from(&mut dot).and(a).and(b).for_each(|s, x, y| *s += x * y);
    }
    let viscous = nu * d.integrate(dot.view())?;
    let mut boundary = 0.0;
    if let Some(alpha) = alpha {
        for (i, comp) in d.components().iter().enumerate() {
            let j = comp.radial_index;
            let s: f64 = (0..d.n_theta)
                .map(|k| {
                    let uv = u.u_r()[[j, k]] * v.u_r()[[j, k]] + u.u_theta()[[j, k]] * v.u_theta()[[j, k]];
                    (comp.curvature - alpha[i][k]) * uv
                })
                .sum();
            boundary -= nu * comp.weight() * s;
        }
    }
    Ok(WeakTerms {
        pairing,
        convection,
        viscous,
        boundary,
    })
}

/// Max over interior time levels of the absolute residual, with the time
/// derivative of `(u, v)` taken by centred differences.
pub fn weak_residual(trajectory: &[SimState], v: &VectorField, nu: f64, bc: &BCSpec) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "weak residual needs at least 3 time levels, got {}",
            trajectory.len()
        )));
    }
    check_test_field(v)?;
    let dt = trajectory[1].t - trajectory[0].t;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("trajectory times must increase".into()));
    }
    for w in trajectory.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::InvalidArgument("trajectory is not equally spaced".into()));
        }
    }
    let domain = trajectory[0].domain().clone();
    let map = VelocityMap::new(domain.clone())?;
    let (nu, alpha) = match bc {
        BCSpec::Euler => (0.0, None),
        BCSpec::NoSlip => (nu, None),
        _ => (nu, bc.friction(&domain)?),
    };
    let terms = trajectory
        .iter()
        .map(|s| {
            let u = map.velocity(&s.omega, s.circulation_inner)?;
            weak_terms(&u, v, nu, alpha.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 1..terms.len() - 1 {
        let ddt = (terms[i + 1].pairing - terms[i - 1].pairing) / (2.0 * dt);
        let t = &terms[i];
        worst = worst.max((ddt + t.convection + t.viscous + t.boundary).abs());
    }
    Ok(worst)
}
