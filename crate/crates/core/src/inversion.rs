//! Numerical inversion of Laplace transforms supplied in log form.
//!
//! Transforms are passed as `s -> ln G(s)` so that Bessel ratios far
//! outside the floating-point range remain usable. Three schemes:
//!
//! * `SaddleParabola` (default): Bromwich integral on the parabola
//!   `s = v (1 + i theta)^2`, with `v` at the real saddle of
//!   `s t + ln G(s)` (floored at `1/t`) and a trapezoidal rule refined until
//!   successive halvings agree.
//! * `FixedTalbot`: the fixed Talbot contour with `M` nodes.
//! * `GaverStehfest`: real-axis Stehfest weights, limited to a few digits in
//!   double precision.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionMethod {
    SaddleParabola,
    FixedTalbot,
    GaverStehfest,
}

impl std::str::FromStr for InversionMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "saddleparabola" | "parabola" | "saddle" => Ok(InversionMethod::SaddleParabola),
            "fixedtalbot" | "talbot" => Ok(InversionMethod::FixedTalbot),
            "gaverstehfest" | "stehfest" => Ok(InversionMethod::GaverStehfest),
            _ => Err(format!("unknown inversion method '{s}'")),
        }
    }
}

/// Choice of inversion scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionControl {
    pub method: InversionMethod,
    /// Node count for `FixedTalbot` and `GaverStehfest`; ignored by the
    /// adaptive default.
    pub nodes: usize,
    /// Recompute every inversion with `FixedTalbot` and fail when the two
    /// disagree beyond `1e-6` relative (floor `1e-10` absolute).
    pub cross_check: bool,
}

impl Default for InversionControl {
    fn default() -> Self {
        InversionControl { method: InversionMethod::SaddleParabola, nodes: 24, cross_check: false }
    }
}

impl InversionControl {
    pub fn new(method: InversionMethod, nodes: usize) -> Result<Self> {
        let c = InversionControl { method, nodes, cross_check: false };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::domain("InversionControl", format!("nodes must be >= 8, got {}", self.nodes)));
        }
        if self.method == InversionMethod::GaverStehfest && (!self.nodes.is_multiple_of(2) || self.nodes > 34) {
            return Err(Error::domain(
                "InversionControl",
                format!("Gaver-Stehfest needs an even node count <= 34, got {}", self.nodes),
            ));
        }
        Ok(())
    }
}

/// Inverted value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverted {
    pub value: f64,
    pub error_estimate: f64,
}

pub const CROSS_CHECK_REL: f64 = 1e-6;
pub const CROSS_CHECK_ABS: f64 = 1e-10;

/// Inverts `G` at time `t`, where `ln_g(s) = ln G(s)`. `length_sq` is a
/// squared length scale of the underlying problem and only bounds the
/// saddle search.
pub fn invert<G: Fn(C64) -> C64>(
    op: &'static str,
    ln_g: &G,
    t: f64,
    ctrl: &InversionControl,
    length_sq: f64,
) -> Result<Inverted> {
    invert_with_avoid(op, ln_g, t, ctrl, length_sq, None)
}

/// As [`invert`], keeping the parabola vertex away from the real point
/// `avoid` (used for transforms with a removable singularity there).
pub(crate) fn invert_with_avoid<G: Fn(C64) -> C64>(
    op: &'static str,
    ln_g: &G,
    t: f64,
    ctrl: &InversionControl,
    length_sq: f64,
    avoid: Option<f64>,
) -> Result<Inverted> {
    ctrl.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(op, format!("t must be finite and > 0, got {t}")));
    }
    let primary = match ctrl.method {
        InversionMethod::SaddleParabola => saddle_parabola(op, ln_g, t, length_sq, avoid)?,
        InversionMethod::FixedTalbot => fixed_talbot(ln_g, t, ctrl.nodes),
        InversionMethod::GaverStehfest => gaver_stehfest(ln_g, t, ctrl.nodes),
    };
    if !primary.value.is_finite() {
        return Err(Error::unstable(op, format!("non-finite result at t = {t}")));
    }
    if ctrl.cross_check {
        let other = if ctrl.method == InversionMethod::FixedTalbot {
            saddle_parabola(op, ln_g, t, length_sq, avoid)?
        } else {
            fixed_talbot(ln_g, t, ctrl.nodes.max(24))
        };
        let diff = (primary.value - other.value).abs();
        let allowed = CROSS_CHECK_REL * primary.value.abs().max(other.value.abs()) + CROSS_CHECK_ABS;
        if diff > allowed {
            return Err(Error::unstable(
                op,
                format!("methods disagree at t = {t}: {} vs {} (|diff| {diff:.3e})", primary.value, other.value),
            ));
        }
    }
    Ok(primary)
}

fn finite_or_inf(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::INFINITY
    }
}

/// Location of the minimum of `s t + Re ln G(s)` over `s = e^u / t`,
/// `u in [0, u_max]`; returns `v = s`.
fn saddle(ln_g: &impl Fn(C64) -> C64, t: f64, length_sq: f64) -> f64 {
    let phi = |u: f64| {
        let s = u.exp() / t;
        finite_or_inf(u.exp() + ln_g(C64::new(s, 0.0)).re)
    };
    let u_max = ((length_sq / t).max(1.0).ln() + 8.0).max(8.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, u_max);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..40 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
    }
    let u = 0.5 * (a + b);
    // stay at the floor when the minimum is not interior
    let u = if phi(0.0) <= phi(u) { 0.0 } else { u };
    u.exp() / t
}

fn saddle_parabola(
    op: &'static str,
    ln_g: &impl Fn(C64) -> C64,
    t: f64,
    length_sq: f64,
    avoid: Option<f64>,
) -> Result<Inverted> {
    let mut v = saddle(ln_g, t, length_sq);
    if let Some(p0) = avoid {
        if (v - p0).abs() < 0.2 * v.max(p0) {
            v = (1.25 * p0).max(1.0 / t);
        }
    }
    let vt = v * t;
    let m0 = ln_g(C64::new(v, 0.0)).re + vt;
    if !m0.is_finite() {
        return Err(Error::unstable(op, format!("transform not finite at the saddle s = {v}")));
    }
    let theta_max = (1.0 + 42.0 / vt).sqrt();
    let g = |th: f64| -> (f64, f64) {
        let w = C64::new(1.0, th);
        let s = w * w * v;
        let e = ln_g(s) + s * t - m0;
        if e.re < -745.0 {
            return (0.0, 0.0);
        }
        let val = (e.exp() * w).re;
        if val.is_finite() {
            (val, val.abs())
        } else {
            (f64::NAN, f64::INFINITY)
        }
    };
    let mut h = (0.5f64).min(0.8 / vt.sqrt());
    let (g0, a0) = g(0.0);
    let mut sum = 0.5 * g0;
    let mut abs_sum = 0.5 * a0;
    let mut k = 1;
    while k as f64 * h <= theta_max {
        let (gv, av) = g(k as f64 * h);
        sum += gv;
        abs_sum += av;
        k += 1;
    }
    let mut prev = sum * h;
    let mut diffs: Vec<f64> = Vec::new();
    for level in 1..=9 {
        let h_new = 0.5 * h;
        let mut add = 0.0;
        let mut abs_add = 0.0;
        let mut j = 1;
        while j as f64 * h_new <= theta_max {
            let (gv, av) = g(j as f64 * h_new);
            add += gv;
            abs_add += av;
            j += 2;
        }
        sum += add;
        abs_sum += abs_add;
        h = h_new;
        let cur = sum * h;
        if !cur.is_finite() {
            break;
        }
        let diff = (cur - prev).abs();
        let l1 = abs_sum * h;
        let scale = 2.0 * v / std::f64::consts::PI * m0.exp();
        let floor = 16.0 * f64::EPSILON * l1;
        if level >= 2 && (diff <= 1e-11 * cur.abs() || diff <= floor) {
            return Ok(Inverted { value: cur * scale, error_estimate: (diff * 1e-3 + floor) * scale });
        }
        diffs.push(diff);
        // discretization error falls off super-geometrically once resolved;
        // a plateau means the transform's own rounding noise is reached
        if level >= 5 {
            let k = diffs.len();
            let noise = diffs[k - 3..].iter().cloned().fold(0.0, f64::max);
            if diffs[k - 1] > 1e-2 * diffs[k - 3] && (noise <= 1e-6 * cur.abs() || noise <= 1e-12 * l1) {
                return Ok(Inverted { value: cur * scale, error_estimate: noise * scale });
            }
        }
        prev = cur;
    }
    Err(Error::unstable(
        op,
        format!(
            "trapezoid on the parabola did not settle at t = {t} (last change {:.3e})",
            diffs.last().cloned().unwrap_or(f64::NAN)
        ),
    ))
}

fn fixed_talbot(ln_g: &impl Fn(C64) -> C64, t: f64, m: usize) -> Inverted {
    let one = |m: usize| -> f64 {
        let mf = m as f64;
        let r = 2.0 * mf / (5.0 * t);
        let mut logs = Vec::with_capacity(m);
        logs.push((ln_g(C64::new(r, 0.0)) + r * t, C64::new(0.5, 0.0)));
        for k in 1..m {
            let th = k as f64 * std::f64::consts::PI / mf;
            let cot = th.cos() / th.sin();
            let s = C64::new(r * th * cot, r * th);
            let sigma = th + (th * cot - 1.0) * cot;
            logs.push((ln_g(s) + s * t, C64::new(1.0, sigma)));
        }
        let m0 = logs.iter().map(|(l, _)| l.re).filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (l, w) in &logs {
            let e = l - m0;
            if e.re > -745.0 {
                sum += (e.exp() * w).re;
            }
        }
        r / mf * sum * m0.exp()
    };
    let a = one(m);
    let b = one(m + 4);
    Inverted { value: a, error_estimate: (a - b).abs() }
}

fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |acc, i| acc * i as f64);
    (1..=n)
        .map(|k| {
            let mut s = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                s += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half).is_multiple_of(2) {
                s
            } else {
                -s
            }
        })
        .collect()
}

fn gaver_stehfest(ln_g: &impl Fn(C64) -> C64, t: f64, n: usize) -> Inverted {
    let one = |n: usize| -> f64 {
        let ln2t = std::f64::consts::LN_2 / t;
        stehfest_weights(n)
            .iter()
            .enumerate()
            .map(|(k, w)| w * ln_g(C64::new((k + 1) as f64 * ln2t, 0.0)).exp().re)
            .sum::<f64>()
            * ln2t
    };
    let a = one(n);
    let b = one(n - 2);
    Inverted { value: a, error_estimate: (a - b).abs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stable_half(c: f64) -> impl Fn(C64) -> C64 {
        move |s: C64| -(s * 2.0).sqrt() * c
    }

    fn stable_density(c: f64, t: f64) -> f64 {
        c / (2.0 * std::f64::consts::PI * t.powi(3)).sqrt() * (-c * c / (2.0 * t)).exp()
    }

    #[test]
    fn parabola_wide_range() {
        let ctrl = InversionControl::default();
        for &t in &[2e-3, 0.05, 1.0, 30.0, 1e4, 1e8] {
            let f = invert("t", &stable_half(1.0), t, &ctrl, 1.0).unwrap();
            let exact = stable_density(1.0, t);
            assert!(((f.value - exact) / exact).abs() < 1e-11, "t={t}: {} vs {exact}", f.value);
        }
    }

    #[test]
    fn talbot_bulk() {
        let ctrl = InversionControl::new(InversionMethod::FixedTalbot, 24).unwrap();
        for &t in &[0.3, 1.0, 5.0] {
            let f = invert("t", &stable_half(1.0), t, &ctrl, 1.0).unwrap();
            let exact = stable_density(1.0, t);
            assert!(((f.value - exact) / exact).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn stehfest_few_digits() {
        let ctrl = InversionControl::new(InversionMethod::GaverStehfest, 16).unwrap();
        let ln_g = |s: C64| -(s + 1.0).ln();
        for &t in &[0.5, 1.0, 3.0] {
            let f = invert("t", &ln_g, t, &ctrl, 1.0).unwrap();
            assert!(((f.value - (-t).exp()) / (-t).exp()).abs() < 1e-4, "t={t}");
        }
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        for n in [8, 12, 16] {
            let s: f64 = stehfest_weights(n).iter().sum();
            assert!(s.abs() < 1e-6 * stehfest_weights(n).iter().map(|w| w.abs()).sum::<f64>());
        }
    }

    #[test]
    fn cross_check_flags_disagreement() {
        let mut ctrl = InversionControl::new(InversionMethod::FixedTalbot, 8).unwrap();
        ctrl.cross_check = true;
        // eight Talbot nodes are far too few at small t
        assert!(invert("t", &stable_half(1.0), 0.01, &ctrl, 1.0).is_err());
        let ok = InversionControl { cross_check: true, ..InversionControl::default() };
        assert!(invert("t", &stable_half(1.0), 1.0, &ok, 1.0).is_ok());
    }

    #[test]
    fn control_validation() {
        assert!(InversionControl::new(InversionMethod::FixedTalbot, 4).is_err());
        assert!(InversionControl::new(InversionMethod::GaverStehfest, 15).is_err());
        assert!(InversionControl::new(InversionMethod::GaverStehfest, 14).is_ok());
        assert_eq!("talbot".parse::<InversionMethod>().unwrap(), InversionMethod::FixedTalbot);
    }
}
