//! Truncated summation of the zonal series with an explicit remainder bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation policy for the zonal series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Largest degree that may be summed.
    pub n_max: usize,
    /// Summation stops once the remainder bound drops below this.
    pub abs_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { n_max: 2000, abs_tol: 1e-12 }
    }
}

impl SeriesControl {
    pub fn new(n_max: usize, abs_tol: f64) -> Result<Self> {
        let c = SeriesControl { n_max, abs_tol };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::domain("SeriesControl", "n_max must be >= 1"));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::domain("SeriesControl", "abs_tol must be finite and > 0"));
        }
        Ok(())
    }
}

/// A truncated series value with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Number of terms summed (degrees `0..terms`).
    pub terms: usize,
    /// Bound on the absolute value of the discarded remainder.
    pub residual_bound: f64,
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const EXPLICIT_TAIL: usize = 64;

/// Bound on `sum_{k >= from} b_k` for a majorant whose term ratios are
/// eventually nonincreasing: an explicit block followed by a geometric tail.
pub(crate) fn tail_sum<B: Fn(usize) -> f64>(bound: &B, from: usize) -> f64 {
    let mut s = 0.0;
    let mut prev = bound(from);
    s += prev;
    for k in from + 1..from + EXPLICIT_TAIL {
        let b = bound(k);
        s += b;
        prev = b;
    }
    let next = bound(from + EXPLICIT_TAIL);
    if next == 0.0 {
        return s;
    }
    let ratio = next / prev;
    if ratio < 1.0 {
        s + next / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

/// Sum `term(n)` for `n = 0, 1, ...` until the remainder bound derived from
/// the majorant `bound` falls below `ctrl.abs_tol`.
pub(crate) fn sum_series<B, T>(op: &'static str, ctrl: &SeriesControl, bound: B, mut term: T) -> Result<SeriesValue>
where
    B: Fn(usize) -> f64,
    T: FnMut(usize) -> Result<f64>,
{
    ctrl.validate()?;
    let mut acc = Accumulator::default();
    for n in 0..=ctrl.n_max {
        acc.add(term(n)?);
        if bound(n + 1) < ctrl.abs_tol {
            let rest = tail_sum(&bound, n + 1);
            if rest < ctrl.abs_tol {
                return Ok(SeriesValue { value: acc.value(), terms: n + 1, residual_bound: rest });
            }
        }
    }
    Err(Error::TruncationNotConverged {
        op,
        terms: ctrl.n_max + 1,
        residual: tail_sum(&bound, ctrl.n_max + 1),
        tol: ctrl.abs_tol,
    })
}
