//! Joint law of the first hitting time `sigma_r` of the sphere of radius
//! `r` and the hitting place `B(sigma_r)`, for Brownian motion started at
//! `(a, 0, ..., 0)`.
//!
//! Everything is a zonal series: the degree-`n` term carries the weight
//! `w_n` (`1, 2, 2, ...` in the plane, `(n+nu)/nu` otherwise), the factor
//! `(a/r)^n`, a first-passage quantity of the radial Bessel process at index
//! `n + nu`, and an integral of the zonal polynomial over the target set.

mod drift;

pub use drift::{
    drift_band_probability, drift_joint_density, drift_joint_laplace, drift_tail_asymptotic, drift_tail_scaled,
    Drift, DriftDensity,
};

use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpt::{fpt_tail_asymptotic, fpt_tail_bound, FirstPassage, Geometry, Regime};
use crate::inversion::InversionControl;
use crate::series::{sum_series, SeriesControl, SeriesValue};
use crate::specfun::{
    band_measure, exp_poly_band_integral, sphere_exp_average, zonal_all, zonal_at_one,
    zonal_weight, Band,
};

/// A time window and a band, optionally with drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointQuery {
    pub geometry: Geometry,
    pub t1: f64,
    pub t2: f64,
    pub band: Band,
    pub drift: Option<Drift>,
}

impl JointQuery {
    pub fn new(geometry: Geometry, t1: f64, t2: f64, band: Band, drift: Option<Drift>) -> Result<Self> {
        if !(t1 >= 0.0) || !t1.is_finite() || !(t2 > t1) {
            return Err(Error::domain("JointQuery", format!("need 0 <= t1 < t2 <= inf, got [{t1}, {t2}]")));
        }
        Ok(JointQuery { geometry, t1, t2, band, drift })
    }

    /// Whole time axis, no drift.
    pub fn place(geometry: Geometry, band: Band) -> Self {
        JointQuery { geometry, t1: 0.0, t2: f64::INFINITY, band, drift: None }
    }
}

/// Per-degree constants of the zonal series for one geometry.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Degree {
    pub weight: f64,
    pub order: f64,
    /// `n ln(a/r)`
    pub ln_geo: f64,
    ratio: f64,
    n: usize,
    pub at_one: f64,
    pub mass: f64,
}

impl Degree {
    /// `(a/r)^n x`, formed in log space so that large `a/r` cannot overflow.
    pub fn geo(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if self.ln_geo.abs() < 600.0 && self.n <= i32::MAX as usize {
            let v = x * self.ratio.powi(self.n as i32);
            if v.is_normal() {
                return v;
            }
        }
        x.signum() * (self.ln_geo + x.abs().ln()).exp()
    }
}

pub(crate) fn degree(geom: &Geometry, n: usize) -> Degree {
    let order = n as f64 + geom.nu();
    let fp = geom.passage(order);
    Degree {
        weight: zonal_weight(geom.d(), n),
        order,
        ln_geo: (n as f64) * (geom.a() / geom.r()).ln(),
        ratio: geom.a() / geom.r(),
        n,
        at_one: zonal_at_one(geom.d(), n),
        mass: fp.mass(),
    }
}

/// `w_n P_n(1) (a/r)^n P(tau < inf)` at index `n + nu`: majorant of the
/// degree-`n` term of any of the series below when the remaining factors
/// are bounded by 1.
pub(crate) fn base_majorant(geom: &Geometry, n: usize) -> f64 {
    let c = degree(geom, n);
    c.weight * c.at_one * c.geo(c.mass)
}

/// Power-law tail bound at index `mu` (and the trivial mass bound).
pub(crate) fn tail_majorant(geom: &Geometry, mu: f64, t: f64) -> f64 {
    let mass = geom.passage(mu).mass();
    if t > 0.0 && mu > 0.0 && geom.regime() == Regime::Exterior {
        mass.min(fpt_tail_bound(mu, geom.r(), t).unwrap_or(f64::INFINITY))
    } else {
        mass
    }
}

fn geometry_op(op: &'static str, geom: &Geometry) -> Result<()> {
    Geometry::new(geom.d(), geom.r(), geom.a()).map(|_| ()).map_err(|e| match e {
        Error::Domain { msg, .. } => Error::domain(op, msg),
        other => other,
    })
}

/// `E[e^{-lambda sigma_r} e^{<u, B(sigma_r)>}; sigma_r < inf]` with
/// `u = (u_axis, u_perp, 0, ...)`.
pub fn joint_laplace(geom: &Geometry, lambda: f64, u_axis: f64, u_perp: f64, ctrl: &SeriesControl) -> Result<SeriesValue> {
    const OP: &str = "joint_laplace";
    geometry_op(OP, geom)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(OP, format!("lambda must be finite and > 0, got {lambda}")));
    }
    if !(u_perp >= 0.0) || !u_axis.is_finite() || !u_perp.is_finite() {
        return Err(Error::domain(OP, format!("need finite u_axis and u_perp >= 0, got ({u_axis}, {u_perp})")));
    }
    let (c1, cp) = (geom.r() * u_axis, geom.r() * u_perp);
    let untilted = c1 == 0.0 && cp == 0.0;
    let tilt = sphere_exp_average(geom.d(), c1.hypot(cp));
    let bound = |n: usize| {
        if untilted && n > 0 {
            0.0
        } else {
            base_majorant(geom, n) * tilt
        }
    };
    let full = Band::full();
    sum_series(OP, ctrl, bound, |n| {
        let integral = exp_poly_band_integral(geom.d(), n, &full, c1, cp)?;
        if integral == 0.0 {
            return Ok(0.0);
        }
        let c = degree(geom, n);
        Ok(c.weight * c.geo(geom.passage(c.order).laplace(lambda)) * integral)
    })
}

/// Joint density `psi(t, x)` of `(sigma_r, B(sigma_r)_1 / r)` with respect
/// to `dt` times the uniform probability measure on the sphere.
///
/// The remainder after degree `n` is estimated from the mass majorant
/// scaled by ten times the largest density-to-mass ratio seen so far; the
/// per-degree densities are not bounded a priori.
pub fn joint_density(geom: &Geometry, t: f64, x: f64, ctrl: &SeriesControl, inv: &InversionControl) -> Result<SeriesValue> {
    Ok(joint_density_row(geom, t, &[x], ctrl, inv)?.remove(0))
}

/// [`joint_density`] at every `x` in `xs`, inverting each degree once.
pub fn joint_density_row(
    geom: &Geometry,
    t: f64,
    xs: &[f64],
    ctrl: &SeriesControl,
    inv: &InversionControl,
) -> Result<Vec<SeriesValue>> {
    const OP: &str = "joint_density";
    geometry_op(OP, geom)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(OP, format!("t must be finite and > 0, got {t}")));
    }
    if let Some(x) = xs.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(Error::domain(OP, format!("|x| must be <= 1, got {x}")));
    }
    let cache = RefCell::new(Vec::<f64>::new());
    let rho = |n: usize| -> Result<f64> {
        if let Some(&v) = cache.borrow().get(n) {
            return Ok(v);
        }
        let mut c = cache.borrow_mut();
        while c.len() <= n {
            let order = degree(geom, c.len()).order;
            c.push(geom.passage(order).density(t, inv)?.value);
        }
        Ok(c[n])
    };
    let mut poly = Vec::new();
    xs.iter()
        .map(|&x| {
            let peak = Cell::new(0.0f64);
            zonal_all(geom.d(), x, &mut poly, ctrl.n_max + 1);
            sum_series(
                OP,
                ctrl,
                |n| base_majorant(geom, n) * 10.0 * peak.get(),
                |n| {
                    let c = degree(geom, n);
                    let rho = rho(n)?;
                    if c.mass > 0.0 {
                        peak.set(peak.get().max(rho / c.mass));
                    }
                    Ok(c.weight * c.geo(rho) * poly[n])
                },
            )
        })
        .collect()
}

/// Closed-form density of the hitting place with respect to the uniform
/// probability measure on the sphere (Poisson kernel), restricted to
/// `sigma_r < inf`.
pub fn poisson_kernel(geom: &Geometry, x: f64) -> f64 {
    let d = geom.d() as f64;
    let (s, pre) = match geom.regime() {
        Regime::Interior => (geom.a() / geom.r(), 1.0),
        Regime::Exterior => {
            let s = geom.r() / geom.a();
            (s, s.powf(d - 2.0))
        }
    };
    // 1 - 2sx + s^2 without cancellation near s = x = 1
    let q = (1.0 - s).powi(2) + 2.0 * s * (1.0 - x);
    pre * (1.0 - s) * (1.0 + s) / q.powf(d / 2.0)
}

/// Hitting-place density as the time-integrated zonal series.
pub fn hitting_place_density(geom: &Geometry, x: f64, ctrl: &SeriesControl) -> Result<SeriesValue> {
    const OP: &str = "hitting_place_density";
    geometry_op(OP, geom)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::domain(OP, format!("|x| must be <= 1, got {x}")));
    }
    let mut poly = Vec::new();
    zonal_all(geom.d(), x, &mut poly, ctrl.n_max + 1);
    sum_series(OP, ctrl, |n| base_majorant(geom, n), |n| {
        let c = degree(geom, n);
        Ok(c.weight * c.geo(c.mass) * poly[n])
    })
}

/// Cached per-degree band integrals for repeated window queries on one
/// geometry and band.
#[derive(Debug, Clone)]
pub struct BandSeries {
    geom: Geometry,
    band: Band,
    c1: f64,
    c_perp: f64,
    integrals: Vec<f64>,
}

impl BandSeries {
    /// Plain band integrals `int_band P_n w_d`.
    pub fn new(geom: Geometry, band: Band) -> Self {
        BandSeries { geom, band, c1: 0.0, c_perp: 0.0, integrals: Vec::new() }
    }

    /// Band integrals tilted by `e^{c1 x} Lambda_{d-1}(c_perp sqrt(1-x^2))`.
    pub fn tilted(geom: Geometry, band: Band, c1: f64, c_perp: f64) -> Self {
        BandSeries { geom, band, c1, c_perp, integrals: Vec::new() }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    /// Degree-`n` band integral.
    pub fn integral(&mut self, n: usize) -> Result<f64> {
        while self.integrals.len() <= n {
            let k = self.integrals.len();
            let v = exp_poly_band_integral(self.geom.d(), k, &self.band, self.c1, self.c_perp)?;
            self.integrals.push(v);
        }
        Ok(self.integrals[n])
    }

    /// Upper bound on `|integral(n)| / P_n(1)`.
    fn integral_scale(&self) -> f64 {
        if self.c1 == 0.0 && self.c_perp == 0.0 {
            band_measure(self.geom.d(), &self.band)
        } else {
            sphere_exp_average(self.geom.d(), self.c1.hypot(self.c_perp))
        }
    }

    /// `P(t1 < sigma_r <= t2, B(sigma_r) in band)` (no drift).
    pub fn window(&mut self, t1: f64, t2: f64, ctrl: &SeriesControl, inv: &InversionControl) -> Result<SeriesValue> {
        const OP: &str = "band_probability";
        if !(t1 >= 0.0) || !(t2 > t1) {
            return Err(Error::domain(OP, format!("need 0 <= t1 < t2 <= inf, got [{t1}, {t2}]")));
        }
        if self.band.is_degenerate() {
            return Ok(SeriesValue { value: 0.0, terms: 0, residual_bound: 0.0 });
        }
        let geom = self.geom;
        let full = self.band.is_full() && self.c1 == 0.0 && self.c_perp == 0.0;
        let scale = self.integral_scale();
        let bound = |n: usize| {
            if full && n > 0 {
                return 0.0;
            }
            let c = degree(&geom, n);
            c.weight * c.at_one * c.geo(tail_majorant(&geom, c.order, t1)) * scale
        };
        sum_series(OP, ctrl, bound, |n| {
            let integral = self.integral(n)?;
            if integral == 0.0 {
                return Ok(0.0);
            }
            let c = degree(&geom, n);
            let w = window(&geom.passage(c.order), t1, t2, 0.0, inv)?;
            Ok(c.weight * c.geo(w) * integral)
        })
    }
}

/// `int_{t1}^{t2} e^{-alpha s} rho(s) ds` for one first passage.
pub(crate) fn window(fp: &FirstPassage, t1: f64, t2: f64, alpha: f64, inv: &InversionControl) -> Result<f64> {
    let (lo2, hi2) = fp.split(t2, alpha, inv)?;
    let (lo1, hi1) = if t1 == 0.0 { (0.0, lo2 + hi2) } else { fp.split(t1, alpha, inv)? };
    // difference of the smaller sides
    let v = if hi1 <= lo2 { hi1 - hi2 } else { lo2 - lo1 };
    Ok(v.max(0.0))
}

fn require_no_drift(op: &'static str, q: &JointQuery) -> Result<()> {
    if q.drift.is_some() {
        return Err(Error::domain(op, "query carries a drift; use the drift operations"));
    }
    Ok(())
}

/// `P(t1 < sigma_r <= t2, B(sigma_r)_1 / r in band)`.
pub fn band_probability(query: &JointQuery, ctrl: &SeriesControl, inv: &InversionControl) -> Result<SeriesValue> {
    const OP: &str = "band_probability";
    require_no_drift(OP, query)?;
    geometry_op(OP, &query.geometry)?;
    BandSeries::new(query.geometry, query.band).window(query.t1, query.t2, ctrl, inv)
}

/// Tail probability split into the base-order term and the correction
/// carried by the degrees `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDecomposition {
    pub value: f64,
    /// `P(t < tau_r < inf)` at index `nu` times the band measure.
    pub leading: f64,
    /// Sum of the degree `n >= 1` terms.
    pub correction: f64,
    /// Explicit bound on `|correction|`: `(2/t) e^{a r/2}` in the plane,
    /// the summed tail bounds `sum_n w_n C_n(1) (a/r)^n r^{2(n+nu)}/(2^{n+nu} Gamma(n+nu+1) t^{n+nu})`
    /// times the band measure otherwise.
    pub correction_bound: f64,
    pub series: SeriesValue,
}

/// `P(t < sigma_r < inf, B(sigma_r) in band)` outside the sphere.
pub fn tail_probability(query: &JointQuery, ctrl: &SeriesControl, inv: &InversionControl) -> Result<TailDecomposition> {
    const OP: &str = "tail_probability";
    require_no_drift(OP, query)?;
    let geom = query.geometry;
    geometry_op(OP, &geom)?;
    if geom.regime() != Regime::Exterior {
        return Err(Error::domain(OP, "tail probabilities need a start outside the sphere"));
    }
    if query.t2 != f64::INFINITY {
        return Err(Error::domain(OP, "tail probabilities need t2 = inf"));
    }
    let t = query.t1;
    if !(t > 0.0) {
        return Err(Error::domain(OP, format!("t must be > 0, got {t}")));
    }
    let series = band_probability(query, ctrl, inv)?;
    let bm = band_measure(geom.d(), &query.band);
    let leading = geom.passage(geom.nu()).split(t, 0.0, inv)?.1 * bm;
    let correction = series.value - leading;
    let correction_bound = if geom.d() == 2 {
        2.0 / t * (0.5 * geom.a() * geom.r()).exp()
    } else {
        let b = |n: usize| {
            let c = degree(&geom, n);
            c.weight * c.at_one * c.geo(fpt_tail_bound(c.order, geom.r(), t).unwrap_or(f64::INFINITY))
        };
        crate::series::tail_sum(&b, 1) * bm
    };
    Ok(TailDecomposition { value: series.value, leading, correction, correction_bound, series })
}

/// Leading-order tail: `fpt_tail_asymptotic(nu, a, r, t1)` times the band
/// measure.
pub fn tail_asymptotic(query: &JointQuery) -> Result<f64> {
    const OP: &str = "tail_asymptotic";
    require_no_drift(OP, query)?;
    let g = query.geometry;
    Ok(fpt_tail_asymptotic(g.nu(), g.a(), g.r(), query.t1)? * band_measure(g.d(), &query.band))
}

#[cfg(test)]
mod tests;
