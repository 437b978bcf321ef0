//! Per-run diagnostic time series.

use std::io::Write;

use crate::error::Result;
use crate::field::VectorField;

use super::SimState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub energy: f64,
    pub l2_gamma_trace: f64,
    pub omega_l2: f64,
    pub omega_linf: f64,
    pub circulation_inner: f64,
}

impl TimeSeriesRow {
    /// Diagnostics of `state`, whose velocity is `u`.
    pub fn measure(state: &SimState, u: &VectorField) -> Self {
        Self {
            t: state.t,
            energy: u.l2(),
            l2_gamma_trace: u.boundary_l2(),
            omega_l2: state.omega.l2(),
            omega_linf: state.omega.linf(),
            circulation_inner: state.circulation_inner,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub rows: Vec<TimeSeriesRow>,
}

pub const TIME_SERIES_HEADER: &str = "t,energy,l2_gamma_trace,omega_l2,omega_linf,circulation_inner";

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, state: &SimState, u: &VectorField) {
        self.rows.push(TimeSeriesRow::measure(state, u));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TIME_SERIES_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.energy, r.l2_gamma_trace, r.omega_l2, r.omega_linf, r.circulation_inner
            )?;
        }
        Ok(())
    }
}
