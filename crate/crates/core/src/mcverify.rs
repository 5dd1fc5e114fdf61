//! Monte Carlo oracle: Brownian paths, optionally drifted, run from
//! `(a, 0, ..., 0)` until they cross the sphere, leave the escape ball or
//! reach the time horizon.
//!
//! Each path draws from its own ChaCha8 stream keyed by `(seed, path_index)`,
//! so results do not depend on the number of worker threads
//! (`SPHEREHIT_THREADS`) or on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpt::{fpt_tail_bound, Geometry, Regime};
use crate::jointdist::{Drift, JointQuery};
use crate::series::Accumulator;

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: u64,
    /// Step cap at distance `<= r` from the sphere; beyond that the cap grows
    /// like the squared distance.
    pub base_step: f64,
    /// Steps are shrunk so that their standard deviation (and drift
    /// displacement) stays below this fraction of the distance to the sphere.
    pub boundary_fraction: f64,
    pub min_step: f64,
    /// Paths reaching this radius are censored. Ignored in the plane, where
    /// only the horizon applies.
    pub escape_radius: f64,
    pub time_horizon: f64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 100_000,
            base_step: 0.01,
            boundary_fraction: 0.2,
            min_step: 1e-8,
            escape_radius: 50.0,
            time_horizon: 100.0,
            seed: 42,
        }
    }
}

impl McConfig {
    pub fn validate(&self, geom: &Geometry) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_paths < 1 {
            return fail("n_paths must be >= 1".into());
        }
        if !(self.base_step > 0.0) || !self.base_step.is_finite() {
            return fail(format!("base_step must be finite and > 0, got {}", self.base_step));
        }
        if !(self.boundary_fraction > 0.0 && self.boundary_fraction < 1.0) {
            return fail(format!("boundary_fraction must lie in (0, 1), got {}", self.boundary_fraction));
        }
        if !(self.min_step > 0.0) || !(self.min_step < self.base_step) {
            return fail(format!("need 0 < min_step < base_step, got {}", self.min_step));
        }
        if !(self.time_horizon > 0.0) || !self.time_horizon.is_finite() {
            return fail(format!("time_horizon must be finite and > 0, got {}", self.time_horizon));
        }
        if geom.d() > 2 && !(self.escape_radius > geom.r().max(geom.a())) {
            return fail(format!(
                "escape_radius must exceed max(a, r) = {}, got {}",
                geom.r().max(geom.a()),
                self.escape_radius
            ));
        }
        Ok(())
    }

    fn escape_applies(&self, geom: &Geometry) -> bool {
        geom.d() > 2 && self.escape_radius.is_finite()
    }
}

/// Why a path stopped without hitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Censor {
    None,
    Escape,
    Horizon,
}

/// Outcome of one path. The place is `B(sigma)/r`: `place_x` along the start
/// axis, `place_y` along the orthogonal drift direction, `place_z` along the
/// third axis (0 in the plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitSample {
    pub hit: bool,
    pub time: f64,
    pub place_x: f64,
    pub place_y: f64,
    pub place_z: f64,
    pub censored_by: Censor,
}

impl HitSample {
    fn censored(by: Censor, time: f64) -> Self {
        HitSample { hit: false, time, place_x: f64::NAN, place_y: f64::NAN, place_z: f64::NAN, censored_by: by }
    }
}

/// Runs path number `path_index`.
pub fn simulate_hit(geom: &Geometry, drift: Option<&Drift>, cfg: &McConfig, path_index: u64) -> HitSample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path_index);
    let d = geom.d() as usize;
    let r = geom.r();
    let (v1, vp) = drift.map_or((0.0, 0.0), |v| (v.v1, v.v_perp));
    let speed = v1.hypot(vp);
    let escape = if cfg.escape_applies(geom) { cfg.escape_radius } else { f64::INFINITY };
    let outside = geom.regime() == Regime::Exterior;

    let mut z = vec![0.0; d];
    let mut next = vec![0.0; d];
    z[0] = geom.a();
    let mut rho = geom.a();
    let mut t = 0.0;
    loop {
        if rho >= escape {
            return HitSample::censored(Censor::Escape, t);
        }
        let remaining = cfg.time_horizon - t;
        if remaining <= 0.0 {
            return HitSample::censored(Censor::Horizon, t);
        }
        let delta = (rho - r).abs();
        let far = (delta / r).max(1.0);
        let mut dt = (cfg.boundary_fraction * delta).powi(2).min(cfg.base_step * far * far);
        if speed > 0.0 {
            dt = dt.min(cfg.boundary_fraction * delta / speed);
        }
        dt = dt.max(cfg.min_step);
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let sd = dt.sqrt();
        let mut norm2 = 0.0;
        for i in 0..d {
            let g: f64 = StandardNormal.sample(&mut rng);
            let shift = match i {
                0 => v1 * dt,
                1 => vp * dt,
                _ => 0.0,
            };
            next[i] = z[i] + sd * g + shift;
            norm2 += next[i] * next[i];
        }
        let rho_next = norm2.sqrt();
        if (rho_next > r) != outside {
            // linear interpolation of |z| - r across the step
            let frac = ((rho - r) / (rho - rho_next)).clamp(0.0, 1.0);
            let mut p = [0.0; 3];
            let mut pn = 0.0;
            for i in 0..d {
                let c = z[i] + frac * (next[i] - z[i]);
                pn += c * c;
                if i < 3 {
                    p[i] = c;
                }
            }
            let pn = pn.sqrt();
            return HitSample {
                hit: true,
                time: t + frac * dt,
                place_x: (p[0] / pn).clamp(-1.0, 1.0),
                place_y: p[1] / pn,
                place_z: p[2] / pn,
                censored_by: Censor::None,
            };
        }
        std::mem::swap(&mut z, &mut next);
        rho = rho_next;
        t += dt;
        if last {
            return HitSample::censored(Censor::Horizon, cfg.time_horizon);
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var("SPHEREHIT_THREADS") {
        let n: usize = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("SPHEREHIT_THREADS must be a positive integer, got {s:?}")))?;
        if n == 0 {
            return Err(Error::Config("SPHEREHIT_THREADS must be >= 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// All `cfg.n_paths` samples, in path order.
pub fn simulate(geom: &Geometry, drift: Option<&Drift>, cfg: &McConfig) -> Result<Vec<HitSample>> {
    cfg.validate(geom)?;
    if let Some(v) = drift {
        v.validate()?;
    }
    let pool = thread_pool()?;
    Ok(pool.install(|| (0..cfg.n_paths).into_par_iter().map(|i| simulate_hit(geom, drift, cfg, i)).collect()))
}

/// Monte Carlo estimate with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub n_paths: u64,
    pub n_censored: u64,
    pub n_escaped: u64,
    pub n_horizon: u64,
    /// A-priori bound on the bias caused by censoring.
    pub bias_bound: f64,
}

/// `P(a path started at distance R from the origin comes within r of it
/// before time T)`, from the reflection principle applied per coordinate.
fn return_bound(d: u32, gap: f64, speed: f64, t: f64) -> f64 {
    if !t.is_finite() {
        return 1.0;
    }
    let rho = gap - speed * t;
    if rho <= 0.0 {
        return 1.0;
    }
    let df = d as f64;
    (2.0 * df * (-rho * rho / (2.0 * df * t)).exp()).min(1.0)
}

/// Bounds on the probabilities that a path is censored by escape and would
/// hit before `t_end`, and that it is censored by the horizon and would hit
/// in `(horizon, t_end]`.
fn censoring_bounds(geom: &Geometry, drift: Option<&Drift>, cfg: &McConfig, t_end: f64) -> (f64, f64) {
    let r = geom.r();
    let speed = drift.map_or(0.0, |v| v.speed());
    let driftless = speed == 0.0;
    let h = cfg.time_horizon;
    let escape = if geom.regime() == Regime::Interior || !cfg.escape_applies(geom) {
        0.0
    } else {
        let power = if driftless { (r / cfg.escape_radius).powi(geom.d() as i32 - 2) } else { 1.0 };
        power.min(return_bound(geom.d(), cfg.escape_radius - r, speed, t_end.min(h)))
    };
    let horizon = if t_end <= h {
        0.0
    } else {
        match geom.regime() {
            Regime::Interior => {
                // still inside at h forces |z_1(h)| < r
                let mut b = 2.0 * r / (2.0 * std::f64::consts::PI * h).sqrt();
                if driftless {
                    let a = geom.a();
                    b = b.min((r * r - a * a) / (geom.d() as f64 * h));
                }
                b.min(1.0)
            }
            Regime::Exterior if driftless && geom.d() > 2 => {
                fpt_tail_bound(geom.nu(), r, h).unwrap_or(1.0).min(1.0)
            }
            Regime::Exterior => 1.0,
        }
    };
    (escape, horizon)
}

/// Largest bias tolerated a priori: a tenth of the worst-case standard
/// error `scale / (2 sqrt(n))` of a `[0, scale]`-valued mean.
fn allowed_bias(cfg: &McConfig, scale: f64) -> f64 {
    0.1 * scale / (2.0 * (cfg.n_paths as f64).sqrt())
}

fn check_shared(geom: &Geometry, drift: Option<&Drift>, q: &JointQuery) -> Result<()> {
    if q.geometry != *geom || q.drift.as_ref() != drift {
        return Err(Error::Config("all queries must share the geometry and drift of the run".into()));
    }
    Ok(())
}

/// Checks every query against the a-priori censoring bias rule and returns
/// the bounds.
pub fn query_bias_bounds(geom: &Geometry, drift: Option<&Drift>, queries: &[JointQuery], cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate(geom)?;
    queries
        .iter()
        .map(|q| {
            check_shared(geom, drift, q)?;
            let (e, h) = censoring_bounds(geom, drift, cfg, q.t2);
            let b = e + h;
            let allowed = allowed_bias(cfg, 1.0);
            if !(b <= allowed) {
                return Err(Error::Config(format!(
                    "censoring bias bound {b:.3e} exceeds {allowed:.3e} for window [{}, {}]; \
                     raise escape_radius or time_horizon",
                    q.t1, q.t2
                )));
            }
            Ok(b)
        })
        .collect()
}

fn counts(samples: &[HitSample]) -> (u64, u64) {
    let esc = samples.iter().filter(|s| s.censored_by == Censor::Escape).count() as u64;
    let hor = samples.iter().filter(|s| s.censored_by == Censor::Horizon).count() as u64;
    (esc, hor)
}

/// Scores already simulated samples against the queries.
pub fn score_queries(samples: &[HitSample], queries: &[JointQuery], bias: &[f64]) -> Vec<McEstimate> {
    let n = samples.len() as u64;
    let (esc, hor) = counts(samples);
    queries
        .iter()
        .zip(bias)
        .map(|(q, &bias_bound)| {
            let k = samples
                .iter()
                .filter(|s| s.hit && s.time > q.t1 && s.time <= q.t2 && q.band.contains(s.place_x))
                .count();
            let p = k as f64 / n as f64;
            McEstimate {
                estimate: p,
                std_err: (p * (1.0 - p) / n as f64).sqrt(),
                n_paths: n,
                n_censored: esc + hor,
                n_escaped: esc,
                n_horizon: hor,
                bias_bound,
            }
        })
        .collect()
}

/// One pass over `cfg.n_paths` paths scoring every query as a hit frequency.
pub fn estimate(geom: &Geometry, drift: Option<&Drift>, queries: &[JointQuery], cfg: &McConfig) -> Result<Vec<McEstimate>> {
    let bias = query_bias_bounds(geom, drift, queries, cfg)?;
    let samples = simulate(geom, drift, cfg)?;
    Ok(score_queries(&samples, queries, &bias))
}

/// Exponent `u = (u_axis, u_perp cos gamma, u_perp sin gamma, 0, ...)` of a
/// Laplace functional, `gamma` measured from the orthogonal drift axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub u_axis: f64,
    pub u_perp: f64,
    pub gamma: f64,
}

impl Exponent {
    pub fn zero() -> Self {
        Exponent { u_axis: 0.0, u_perp: 0.0, gamma: 0.0 }
    }

    fn norm(&self) -> f64 {
        self.u_axis.hypot(self.u_perp)
    }
}

/// A-priori bias bound for `E[e^{-lambda sigma} e^{<u, B_sigma>}; sigma < inf]`.
pub fn laplace_bias_bound(geom: &Geometry, drift: Option<&Drift>, lambda: f64, u: &Exponent, cfg: &McConfig) -> Result<f64> {
    const OP: &str = "estimate_laplace_functional";
    cfg.validate(geom)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(OP, format!("lambda must be finite and > 0, got {lambda}")));
    }
    if !(u.u_perp >= 0.0) || !u.u_axis.is_finite() || !u.u_perp.is_finite() || !u.gamma.is_finite() {
        return Err(Error::domain(OP, "need finite u_axis, gamma and u_perp >= 0"));
    }
    if geom.d() == 2 && u.u_perp > 0.0 && u.gamma.sin().abs() > 1e-12 {
        return Err(Error::domain(OP, "in the plane the orthogonal exponent must be parallel to the drift axis"));
    }
    let w = (u.norm() * geom.r()).exp();
    let decay = (-lambda * cfg.time_horizon).exp();
    let (e, _) = censoring_bounds(geom, drift, cfg, cfg.time_horizon);
    let escape = if geom.regime() == Regime::Exterior && cfg.escape_applies(geom) { (e + decay).min(1.0) } else { 0.0 };
    let b = w * (escape + decay);
    let allowed = allowed_bias(cfg, w);
    if !(b <= allowed) {
        return Err(Error::Config(format!(
            "censoring bias bound {b:.3e} exceeds {allowed:.3e}; raise escape_radius or time_horizon"
        )));
    }
    Ok(b)
}

/// Mean of `e^{-lambda sigma} e^{<u, B_sigma>}` (0 on paths that do not hit).
pub fn score_laplace(samples: &[HitSample], geom: &Geometry, lambda: f64, u: &Exponent, bias_bound: f64) -> McEstimate {
    let r = geom.r();
    let (cg, sg) = (u.gamma.cos(), u.gamma.sin());
    let mut sum = Accumulator::default();
    let mut sum2 = Accumulator::default();
    for s in samples.iter().filter(|s| s.hit) {
        let e = r * (u.u_axis * s.place_x + u.u_perp * (cg * s.place_y + sg * s.place_z));
        let w = (e - lambda * s.time).exp();
        sum.add(w);
        sum2.add(w * w);
    }
    let n = samples.len() as f64;
    let mean = sum.value() / n;
    let var = (sum2.value() / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    let (esc, hor) = counts(samples);
    McEstimate {
        estimate: mean,
        std_err: (var / n).sqrt(),
        n_paths: samples.len() as u64,
        n_censored: esc + hor,
        n_escaped: esc,
        n_horizon: hor,
        bias_bound,
    }
}

/// Estimate of `E[e^{-lambda sigma} e^{<u, B_sigma>}; sigma < inf]`.
pub fn estimate_laplace_functional(
    geom: &Geometry,
    drift: Option<&Drift>,
    lambda: f64,
    u: &Exponent,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let bias = laplace_bias_bound(geom, drift, lambda, u, cfg)?;
    let samples = simulate(geom, drift, cfg)?;
    Ok(score_laplace(&samples, geom, lambda, u, bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::Band;

    fn cfg(n: u64) -> McConfig {
        McConfig { n_paths: n, ..McConfig::default() }
    }

    #[test]
    fn deterministic_per_path() {
        let g = Geometry::new(3, 1.0, 2.0).unwrap();
        let c = cfg(8);
        let a: Vec<_> = (0..8).map(|i| simulate_hit(&g, None, &c, i)).collect();
        let b: Vec<_> = (0..8).rev().map(|i| simulate_hit(&g, None, &c, i)).collect();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert_eq!(format!("{x:?}"), format!("{y:?}"));
        }
        assert_ne!(format!("{:?}", a[0]), format!("{:?}", a[1]));
    }

    #[test]
    fn interior_paths_hit() {
        let g = Geometry::new(2, 1.0, 0.3).unwrap();
        let s = simulate(&g, None, &cfg(2000)).unwrap();
        assert!(s.iter().all(|h| h.hit && h.censored_by == Censor::None));
        for h in &s {
            let n = h.place_x.hypot(h.place_y);
            assert!((n - 1.0).abs() < 1e-12);
            assert!(h.time > 0.0);
        }
    }

    #[test]
    fn bias_rule() {
        let g = Geometry::new(3, 1.0, 2.0).unwrap();
        let q = JointQuery::new(g, 0.0, f64::INFINITY, Band::full(), None).unwrap();
        let c = McConfig { n_paths: 1_000_000, ..McConfig::default() };
        assert!(matches!(query_bias_bounds(&g, None, &[q], &c), Err(Error::Config(_))));
        let c = McConfig { escape_radius: 3e4, time_horizon: 1e12, ..c };
        let b = query_bias_bounds(&g, None, &[q], &c).unwrap();
        assert!(b[0] <= 5e-5);
        // finite windows only need the escape ball to be out of reach in time
        let q = JointQuery::new(g, 0.2, 1.0, Band::full(), None).unwrap();
        let c = McConfig { n_paths: 1_000_000, escape_radius: 50.0, time_horizon: 1.0, ..McConfig::default() };
        assert!(query_bias_bounds(&g, None, &[q], &c).unwrap()[0] < 1e-100);
    }

    #[test]
    fn config_validation() {
        let g = Geometry::new(3, 1.0, 2.0).unwrap();
        assert!(McConfig { n_paths: 0, ..cfg(1) }.validate(&g).is_err());
        assert!(McConfig { boundary_fraction: 1.0, ..cfg(1) }.validate(&g).is_err());
        assert!(McConfig { min_step: 1.0, ..cfg(1) }.validate(&g).is_err());
        assert!(McConfig { escape_radius: 1.5, ..cfg(1) }.validate(&g).is_err());
        assert!(McConfig { time_horizon: f64::INFINITY, ..cfg(1) }.validate(&g).is_err());
        assert!(cfg(1).validate(&g).is_ok());
    }
}
