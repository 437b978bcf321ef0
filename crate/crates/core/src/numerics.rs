//! Scalar quadrature, ODE integration, root finding and 1D minimisation.

use crate::error::{Error, Result};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for nodes 1, 3, 5 and the centre.
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let f = &f as &dyn Fn(f64) -> f64;
    let (mut total, mut err) = kronrod(f, a, b);
    let mut pieces = vec![(a, b, total, err)];
    for _ in 0..2000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one piece");
        let (lo, hi, v, e) = pieces.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(f, lo, mid);
        let (v2, e2) = kronrod(f, mid, hi);
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    if !total.is_finite() {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    // Re-sum to shed the accumulated update error.
    Ok(pieces.iter().map(|p| p.2).sum())
}

/// Integrates the scalar ODE `y' = f(t, y)` from `t0` to `t1` with the
/// Dormand-Prince 5(4) pair.
pub fn dormand_prince(
    f: impl Fn(f64, f64) -> f64,
    y0: f64,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<f64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * span.abs().min(1e-3 * span.abs().max(1e-12));
    let mut k = [0.0; 7];
    for _ in 0..1_000_000 {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 0..7 {
            let ys = y + h * (0..s).map(|i| A[s][i] * k[i]).sum::<f64>();
            k[s] = f(t + C[s] * h, ys);
        }
        let y_new = y + h * (0..6).map(|i| A[6][i] * k[i]).sum::<f64>();
        if !y_new.is_finite() {
            return Err(Error::Numerical(format!("ODE solution non-finite near t = {t}")));
        }
        let err_est = h * (0..7).map(|i| E[i] * k[i]).sum::<f64>();
        let scale = atol + rtol * y.abs().max(y_new.abs());
        let ratio = err_est.abs() / scale;
        if ratio <= 1.0 {
            t += h;
            y = y_new;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Numerical(format!("ODE step size underflow at t = {t}")));
        }
    }
    Err(Error::Numerical("ODE integration exceeded the step budget".into()))
}

/// Brent's method for a sign-changing bracket `[a, b]`.
pub fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Numerical(format!(
            "root not bracketed in [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::Numerical("Brent iteration did not converge".into()))
}

/// Golden-section minimisation on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol * (1.0 + x1.abs().max(x2.abs())) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_smooth_and_peaked_integrands() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, 1e-13, 0.0).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = integrate(|x| 1.0 / x, 1e-8, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 8.0 * 10f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn ode_exponential() {
        let y = dormand_prince(|_, y| -2.0 * y, 1.0, 0.0, 1.5, 1e-11, 1e-14).unwrap();
        assert!((y - (-3.0f64).exp()).abs() < 1e-10);
        assert_eq!(dormand_prince(|_, y| y, 2.0, 1.0, 1.0, 1e-9, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn brent_finds_cube_root() {
        let x = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-13);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-15);
    }
}
