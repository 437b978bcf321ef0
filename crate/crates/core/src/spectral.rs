//! Periodic Fourier differentiation along the angular direction.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct ThetaOps {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ThetaOps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaOps").field("n", &self.n).finish()
    }
}

impl ThetaOps {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber of FFT bin `k`; the Nyquist bin maps to `+n/2`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    pub fn is_nyquist(&self, k: usize) -> bool {
        self.n % 2 == 0 && k == self.n / 2
    }

    /// Normalised Fourier coefficients (`f = sum c_k e^{i m_k theta}`).
    pub fn forward(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = row.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Real part of the synthesis sum for the given coefficients.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Row-wise forward transform of an `(n_r, n_theta)` array.
    pub fn forward_rows(&self, f: ArrayView2<f64>) -> Array2<Complex64> {
        let mut out = f.mapv(|x| Complex64::new(x, 0.0));
        let scale = 1.0 / self.n as f64;
        for mut row in out.axis_iter_mut(Axis(0)) {
            let slice = row.as_slice_mut().expect("standard layout");
            self.forward.process(slice);
            slice.iter_mut().for_each(|c| *c *= scale);
        }
        out
    }

    pub fn inverse_rows(&self, mut coeffs: Array2<Complex64>) -> Array2<f64> {
        for mut row in coeffs.axis_iter_mut(Axis(0)) {
            self.inverse.process(row.as_slice_mut().expect("standard layout"));
        }
        coeffs.mapv(|c| c.re)
    }

    /// First angular derivative. The Nyquist coefficient is dropped so the
    /// result of differentiating real data stays real.
    pub fn derivative(&self, f: ArrayView2<f64>) -> Array2<f64> {
        let mut c = self.forward_rows(f);
        for mut row in c.axis_iter_mut(Axis(0)) {
            for (k, v) in row.iter_mut().enumerate() {
                if self.is_nyquist(k) {
                    *v = Complex64::new(0.0, 0.0);
                } else {
                    *v *= Complex64::new(0.0, self.wavenumber(k));
                }
            }
        }
        self.inverse_rows(c)
    }

    pub fn second_derivative(&self, f: ArrayView2<f64>) -> Array2<f64> {
        let mut c = self.forward_rows(f);
        for mut row in c.axis_iter_mut(Axis(0)) {
            for (k, v) in row.iter_mut().enumerate() {
                let m = self.wavenumber(k);
                *v *= -m * m;
            }
        }
        self.inverse_rows(c)
    }

    /// Angular mean of each row.
    pub fn row_means(&self, f: ArrayView2<f64>) -> Vec<f64> {
        f.axis_iter(Axis(0))
            .map(|row| row.sum() / self.n as f64)
            .collect()
    }
}
