//! Brownian motion with constant drift `v`, reduced to the driftless series
//! by the Cameron-Martin density `e^{<v, B_t> - <v, B_0> - |v|^2 t/2}`
//! evaluated at the hitting time.

use serde::{Deserialize, Serialize};

use super::{degree, geometry_op, joint_density, joint_laplace, tail_majorant, window, BandSeries, JointQuery};
use crate::error::{Error, Result};
use crate::fpt::{l_const, Geometry, Regime};
use crate::inversion::InversionControl;
use crate::series::{sum_series, SeriesControl, SeriesValue};
use crate::specfun::{exp_poly_band_integral, sphere_exp_average};

/// Constant drift: `v1` along the start axis, `v_perp >= 0` orthogonal to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub v1: f64,
    pub v_perp: f64,
}

impl Drift {
    pub fn new(v1: f64, v_perp: f64) -> Result<Self> {
        let d = Drift { v1, v_perp };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v1.is_finite() || !self.v_perp.is_finite() || !(self.v_perp >= 0.0) {
            return Err(Error::domain("Drift", format!("need finite v1 and v_perp >= 0, got ({}, {})", self.v1, self.v_perp)));
        }
        Ok(())
    }

    /// `|v|`
    pub fn speed(&self) -> f64 {
        self.v1.hypot(self.v_perp)
    }

    /// `|v|^2 / 2`, the killing rate added by the change of measure.
    pub fn alpha(&self) -> f64 {
        0.5 * (self.v1 * self.v1 + self.v_perp * self.v_perp)
    }

    pub fn is_zero(&self) -> bool {
        self.v1 == 0.0 && self.v_perp == 0.0
    }
}

fn check_drift(op: &'static str, drift: &Drift) -> Result<()> {
    drift.validate().map_err(|e| match e {
        Error::Domain { msg, .. } => Error::domain(op, msg),
        other => other,
    })
}

/// `E[e^{-lambda sigma} e^{<u, B_sigma>}; sigma < inf]` under drift `v`.
///
/// `gamma` is the planar angle between the orthogonal parts of `u` and `v`.
pub fn drift_joint_laplace(
    geom: &Geometry,
    drift: &Drift,
    lambda: f64,
    u_axis: f64,
    u_perp: f64,
    gamma: f64,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    const OP: &str = "drift_joint_laplace";
    check_drift(OP, drift)?;
    if !(u_perp >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain(OP, format!("need u_perp >= 0 and finite gamma, got ({u_perp}, {gamma})")));
    }
    let perp_sq = u_perp * u_perp + drift.v_perp * drift.v_perp + 2.0 * u_perp * drift.v_perp * gamma.cos();
    let perp = perp_sq.max(0.0).sqrt();
    let s = joint_laplace(geom, lambda + drift.alpha(), u_axis + drift.v1, perp, ctrl)?;
    let f = (-geom.a() * drift.v1).exp();
    Ok(SeriesValue { value: f * s.value, terms: s.terms, residual_bound: f * s.residual_bound })
}

/// Drifted joint density at hitting place with `z_1 = r x`.
///
/// The density with respect to `dt` times the uniform measure on the
/// sphere is `axial * e^{c1 + c2 cos phi}`, where `phi` is the angle
/// between the orthogonal parts of `z` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftDensity {
    /// `psi(t, x) e^{-a v1 - |v|^2 t/2}`
    pub axial: f64,
    /// `(r v1 x, r v_perp sqrt(1 - x^2))`
    pub tilt: (f64, f64),
    pub series: SeriesValue,
}

impl DriftDensity {
    /// Density averaged over the residual angle `phi`.
    pub fn averaged(&self, d: u32) -> f64 {
        let (c1, c2) = self.tilt;
        self.axial * c1.exp() * sphere_exp_average(d.saturating_sub(1), c2)
    }
}

pub fn drift_joint_density(
    geom: &Geometry,
    drift: &Drift,
    t: f64,
    x: f64,
    ctrl: &SeriesControl,
    inv: &InversionControl,
) -> Result<DriftDensity> {
    const OP: &str = "drift_joint_density";
    check_drift(OP, drift)?;
    let series = joint_density(geom, t, x, ctrl, inv)?;
    let f = (-geom.a() * drift.v1 - drift.alpha() * t).exp();
    let r = geom.r();
    let tilt = (r * drift.v1 * x, r * drift.v_perp * ((1.0 - x) * (1.0 + x)).max(0.0).sqrt());
    Ok(DriftDensity { axial: f * series.value, tilt, series })
}

/// `P(t1 < sigma <= t2, B_sigma in band)` under the query's drift.
pub fn drift_band_probability(query: &JointQuery, ctrl: &SeriesControl, inv: &InversionControl) -> Result<SeriesValue> {
    const OP: &str = "drift_band_probability";
    let geom = query.geometry;
    geometry_op(OP, &geom)?;
    let drift = query.drift.unwrap_or(Drift { v1: 0.0, v_perp: 0.0 });
    check_drift(OP, &drift)?;
    if !(query.t1 >= 0.0) || !(query.t2 > query.t1) {
        return Err(Error::domain(OP, format!("need 0 <= t1 < t2 <= inf, got [{}, {}]", query.t1, query.t2)));
    }
    if query.band.is_degenerate() {
        return Ok(SeriesValue { value: 0.0, terms: 0, residual_bound: 0.0 });
    }
    let r = geom.r();
    let mut bs = BandSeries::tilted(geom, query.band, r * drift.v1, r * drift.v_perp);
    if drift.is_zero() {
        return bs.window(query.t1, query.t2, ctrl, inv);
    }
    let alpha = drift.alpha();
    let (t1, t2) = (query.t1, query.t2);
    let scale = sphere_exp_average(geom.d(), r * drift.speed());
    let bound = |n: usize| {
        let c = degree(&geom, n);
        let fp = geom.passage(c.order);
        let m = fp.laplace(alpha).min((-alpha * t1).exp() * tail_majorant(&geom, c.order, t1));
        c.weight * c.at_one * c.geo(m) * scale
    };
    let s = sum_series(OP, ctrl, bound, |n| {
        let integral = bs.integral(n)?;
        if integral == 0.0 {
            return Ok(0.0);
        }
        let c = degree(&geom, n);
        let w = window(&geom.passage(c.order), t1, t2, alpha, inv)?;
        Ok(c.weight * c.geo(w) * integral)
    })?;
    let f = (-geom.a() * drift.v1).exp();
    Ok(SeriesValue { value: f * s.value, terms: s.terms, residual_bound: f * s.residual_bound })
}

/// `e^{|v|^2 t/2} P(t < sigma < inf, B_sigma in band)` under drift,
/// for `query.t1 = t > 0` and `query.t2 = inf`.
pub fn drift_tail_scaled(query: &JointQuery, ctrl: &SeriesControl, inv: &InversionControl) -> Result<SeriesValue> {
    const OP: &str = "drift_tail";
    let geom = query.geometry;
    geometry_op(OP, &geom)?;
    let drift = query.drift.ok_or_else(|| Error::domain(OP, "query carries no drift"))?;
    check_drift(OP, &drift)?;
    if drift.is_zero() {
        return Err(Error::domain(OP, "drift must be nonzero"));
    }
    if query.t2 != f64::INFINITY {
        return Err(Error::domain(OP, "tail probabilities need t2 = inf"));
    }
    let t = query.t1;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(OP, format!("t must be finite and > 0, got {t}")));
    }
    if query.band.is_degenerate() {
        return Ok(SeriesValue { value: 0.0, terms: 0, residual_bound: 0.0 });
    }
    let r = geom.r();
    let alpha = drift.alpha();
    let mut bs = BandSeries::tilted(geom, query.band, r * drift.v1, r * drift.v_perp);
    let scale = sphere_exp_average(geom.d(), r * drift.speed());
    // e^{alpha t} int_t^inf e^{-alpha s} rho(s) ds <= P(t < tau < inf)
    let bound = |n: usize| {
        let c = degree(&geom, n);
        c.weight * c.at_one * c.geo(tail_majorant(&geom, c.order, t)) * scale
    };
    let s = sum_series(OP, ctrl, bound, |n| {
        let integral = bs.integral(n)?;
        if integral == 0.0 {
            return Ok(0.0);
        }
        let c = degree(&geom, n);
        let ln_h = geom.passage(c.order).weighted_tail_scaled_ln(t, alpha, inv)?;
        if ln_h == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok(c.weight * integral * (c.ln_geo + ln_h).exp())
    })?;
    let f = (-geom.a() * drift.v1).exp();
    Ok(SeriesValue { value: f * s.value, terms: s.terms, residual_bound: f * s.residual_bound })
}

/// Leading-order drifted tail at `t = query.t1`, outside the sphere.
pub fn drift_tail_asymptotic(query: &JointQuery) -> Result<f64> {
    const OP: &str = "drift_tail_asymptotic";
    let geom = query.geometry;
    geometry_op(OP, &geom)?;
    if geom.regime() != Regime::Exterior {
        return Err(Error::domain(OP, "the drifted tail asymptotic needs a start outside the sphere"));
    }
    let drift = query.drift.ok_or_else(|| Error::domain(OP, "query carries no drift"))?;
    check_drift(OP, &drift)?;
    if drift.is_zero() {
        return Err(Error::domain(OP, "drift must be nonzero"));
    }
    let t = query.t1;
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::domain(OP, format!("need finite t > 1, got {t}")));
    }
    let (a, r) = (geom.a(), geom.r());
    let tilt = exp_poly_band_integral(geom.d(), 0, &query.band, r * drift.v1, r * drift.v_perp)?;
    let alpha = drift.alpha();
    let shape = if geom.d() == 2 {
        2.0 * (a / r).ln() / (t * t.ln().powi(2))
    } else {
        let nu = geom.nu();
        2.0 * l_const(nu, a, r)? / (2.0 * alpha) * t.powf(-nu - 1.0)
    };
    Ok(shape * tilt * (-a * drift.v1 - alpha * t).exp())
}
