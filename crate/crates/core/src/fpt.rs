//! First passage of a Bessel process to a level: Laplace transforms,
//! densities and distribution functions by numerical inversion, and the
//! constants governing the tails.
//!
//! A Bessel process of index `mu` started at `a` hits `r` at `tau_r` with
//! `E[e^{-lambda tau_r}] = a^{-mu} L_mu(a sqrt(2 lambda)) / (r^{-mu} L_mu(r sqrt(2 lambda)))`,
//! `L = I` below the level and `L = K` above it. The radial part of
//! `d`-dimensional Brownian motion is the case `mu = (d-2)/2`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{invert, InversionControl, InversionMethod};
use crate::specfun::{exp_m1, ln_bessel_i_complex, ln_k_small_correction, ln_k_with_ratio, order_of_dimension};

/// Whether the start lies inside or outside the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Interior,
    Exterior,
}

/// Dimension, sphere radius and start radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    d: u32,
    r: f64,
    a: f64,
}

impl Geometry {
    pub fn new(d: u32, r: f64, a: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain("Geometry", format!("dimension must be >= 2, got {d}")));
        }
        if !(r > 0.0) || !r.is_finite() || !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain("Geometry", format!("radii must be finite and > 0, got r={r}, a={a}")));
        }
        if a == r {
            return Err(Error::domain("Geometry", "start radius equals sphere radius"));
        }
        Ok(Geometry { d, r, a })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `nu = (d-2)/2`.
    pub fn nu(&self) -> f64 {
        order_of_dimension(self.d)
    }

    pub fn regime(&self) -> Regime {
        if self.a < self.r {
            Regime::Interior
        } else {
            Regime::Exterior
        }
    }

    /// `P(sigma_r < inf)`: 1 inside or in the plane, `(r/a)^{d-2}` otherwise.
    pub fn hitting_probability(&self) -> f64 {
        self.passage(self.nu()).mass()
    }

    /// First passage of the radial process at index `mu`.
    pub fn passage(&self, mu: f64) -> FirstPassage {
        FirstPassage { mu, a: self.a, r: self.r }
    }

    /// Same geometry with both radii multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Geometry::new(self.d, self.r * c, self.a * c)
    }
}

/// Result of an inverted density, flagged when small negative noise was
/// clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub error_estimate: f64,
    pub clamped: bool,
}

/// Negative inversion output above this is treated as rounding noise.
pub const NEGATIVE_NOISE: f64 = 1e-10;

/// First passage from `a` to `r` of a Bessel process of index `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassage {
    mu: f64,
    a: f64,
    r: f64,
}

impl FirstPassage {
    pub fn new(mu: f64, a: f64, r: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::domain("FirstPassage", format!("index must be finite and >= 0, got {mu}")));
        }
        if !(r > 0.0) || !r.is_finite() || !(a > 0.0) || !a.is_finite() || a == r {
            return Err(Error::domain("FirstPassage", format!("need distinct finite radii > 0, got a={a}, r={r}")));
        }
        Ok(FirstPassage { mu, a, r })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn regime(&self) -> Regime {
        if self.a < self.r {
            Regime::Interior
        } else {
            Regime::Exterior
        }
    }

    /// `P(tau_r < inf)`.
    pub fn mass(&self) -> f64 {
        match self.regime() {
            Regime::Interior => 1.0,
            Regime::Exterior if self.mu == 0.0 => 1.0,
            Regime::Exterior => (self.r / self.a).powf(2.0 * self.mu),
        }
    }

    fn length_sq(&self) -> f64 {
        (self.a - self.r).powi(2)
    }

    /// `ln E[e^{-s tau_r}; tau_r < inf]` for complex `s` off the negative axis.
    pub fn ln_laplace(&self, s: C64) -> C64 {
        if s == C64::new(0.0, 0.0) {
            return C64::new(self.mass().ln(), 0.0);
        }
        let z = (s * 2.0).sqrt();
        let pre = self.mu * (self.r / self.a).ln();
        match self.regime() {
            Regime::Interior => ln_bessel_i_complex(self.mu, z * self.a) - ln_bessel_i_complex(self.mu, z * self.r) + pre,
            Regime::Exterior => {
                ln_k_with_ratio(self.mu, z * self.a).0 - ln_k_with_ratio(self.mu, z * self.r).0 + pre
            }
        }
    }

    /// `ln(P(tau_r < inf) - E[e^{-s tau_r}; tau_r < inf])`.
    ///
    /// Outside the sphere with `mu > 0` and small `|s|` the difference is
    /// formed from the small-argument corrections of `K_mu`, which keeps its
    /// relative accuracy where the direct subtraction would cancel.
    pub fn ln_complement(&self, s: C64) -> C64 {
        let mass = self.mass();
        if self.regime() == Regime::Exterior && self.mu > 0.0 && s != C64::new(0.0, 0.0) {
            let z = (s * 2.0).sqrt();
            if (z * self.a).norm() <= 1.0 {
                if let (Some(la), Some(lr)) =
                    (ln_k_small_correction(self.mu, z * self.a), ln_k_small_correction(self.mu, z * self.r))
                {
                    return (-exp_m1(la - lr)).ln() + mass.ln();
                }
            }
        }
        (C64::new(mass, 0.0) - self.ln_laplace(s).exp()).ln()
    }

    /// `E[e^{-lambda tau_r}; tau_r < inf]` for real `lambda >= 0`.
    pub fn laplace(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return self.mass();
        }
        self.ln_laplace(C64::new(lambda, 0.0)).re.exp()
    }

    /// Density of `tau_r` at `t`.
    pub fn density(&self, t: f64, inv: &InversionControl) -> Result<DensityValue> {
        const OP: &str = "fpt_density";
        check_time(OP, t)?;
        if t.is_infinite() {
            return Ok(DensityValue { value: 0.0, error_estimate: 0.0, clamped: false });
        }
        let f = |s: C64| self.ln_laplace(s);
        let v = invert(OP, &f, t, inv, self.length_sq())?;
        clamp(OP, v.value, v.error_estimate, t)
    }

    /// `(int_0^t e^{-alpha s} rho(s) ds, int_t^inf e^{-alpha s} rho(s) ds)`.
    ///
    /// The smaller of the two is inverted directly and the other is taken
    /// from the exact total, so both are accurate in the absolute sense and
    /// the small one also relatively.
    pub fn split(&self, t: f64, alpha: f64, inv: &InversionControl) -> Result<(f64, f64)> {
        const OP: &str = "fpt_cdf";
        if !(t >= 0.0) {
            return Err(Error::domain(OP, format!("t must be >= 0, got {t}")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::domain(OP, format!("weight rate must be finite and >= 0, got {alpha}")));
        }
        let total = self.laplace(alpha);
        if t == 0.0 {
            return Ok((0.0, total));
        }
        if t.is_infinite() {
            return Ok((total, 0.0));
        }
        let lower = self.lower_direct(t, alpha, inv)?;
        if lower <= 0.5 * total {
            return Ok((lower, (total - lower).max(0.0)));
        }
        let upper = self.upper_direct(t, alpha, inv)?;
        Ok(((total - upper).max(0.0), upper))
    }

    fn lower_direct(&self, t: f64, alpha: f64, inv: &InversionControl) -> Result<f64> {
        const OP: &str = "fpt_cdf";
        let f = |s: C64| self.ln_laplace(s + alpha) - s.ln();
        let v = invert(OP, &f, t, inv, self.length_sq())?;
        Ok(clamp(OP, v.value, v.error_estimate, t)?.value)
    }

    fn upper_direct(&self, t: f64, alpha: f64, inv: &InversionControl) -> Result<f64> {
        if alpha == 0.0 {
            const OP: &str = "fpt_tail";
            let f = |s: C64| self.ln_complement(s) - s.ln();
            let v = invert(OP, &f, t, inv, self.length_sq())?;
            Ok(clamp(OP, v.value, v.error_estimate, t)?.value)
        } else {
            Ok((self.weighted_tail_scaled_ln(t, alpha, inv)? - alpha * t).exp())
        }
    }

    /// `ln(e^{alpha t} int_t^inf e^{-alpha s} rho(s) ds)` for `alpha > 0`,
    /// inverting `(F(alpha) - F(p))/(p - alpha)` in the shifted variable.
    pub fn weighted_tail_scaled_ln(&self, t: f64, alpha: f64, inv: &InversionControl) -> Result<f64> {
        const OP: &str = "h_exp_tail";
        check_time(OP, t)?;
        let f_alpha = self.laplace(alpha);
        let ln_g = |p: C64| {
            let mut p = p;
            let gap = p - alpha;
            if gap.norm() < 1e-3 * alpha {
                // removable point: evaluate the difference quotient nearby
                p = C64::new(alpha * (1.0 + 1e-3), 0.0);
            }
            let num = C64::new(f_alpha, 0.0) - self.ln_laplace(p).exp();
            num.ln() - (p - alpha).ln()
        };
        // the contour must not pass close to the removable point
        let v = invert_avoiding(OP, &ln_g, t, inv, self.length_sq(), alpha)?;
        let c = clamp(OP, v.value, v.error_estimate, t)?;
        Ok(c.value.ln())
    }
}

/// Runs the inversion, nudging the parabola vertex away from `avoid`.
fn invert_avoiding<G: Fn(C64) -> C64>(
    op: &'static str,
    ln_g: &G,
    t: f64,
    inv: &InversionControl,
    length_sq: f64,
    avoid: f64,
) -> Result<crate::inversion::Inverted> {
    if inv.method != InversionMethod::SaddleParabola {
        return invert(op, ln_g, t, inv, length_sq);
    }
    crate::inversion::invert_with_avoid(op, ln_g, t, inv, length_sq, Some(avoid))
}

fn check_time(op: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(op, format!("t must be > 0, got {t}")));
    }
    Ok(())
}

fn clamp(op: &'static str, value: f64, err: f64, t: f64) -> Result<DensityValue> {
    if value >= 0.0 {
        Ok(DensityValue { value, error_estimate: err, clamped: false })
    } else if value >= -NEGATIVE_NOISE {
        Ok(DensityValue { value: 0.0, error_estimate: err.max(-value), clamped: true })
    } else {
        Err(Error::unstable(op, format!("negative value {value:.3e} at t = {t}")))
    }
}

fn passage(op: &'static str, mu: f64, a: f64, r: f64) -> Result<FirstPassage> {
    FirstPassage::new(mu, a, r).map_err(|e| match e {
        Error::Domain { msg, .. } => Error::domain(op, msg),
        other => other,
    })
}

/// `E[e^{-lambda tau_r}; tau_r < inf]`.
pub fn fpt_laplace(mu: f64, a: f64, r: f64, lambda: f64) -> Result<f64> {
    const OP: &str = "fpt_laplace";
    if !(lambda > 0.0) {
        return Err(Error::domain(OP, format!("lambda must be > 0, got {lambda}")));
    }
    Ok(passage(OP, mu, a, r)?.laplace(lambda))
}

/// Density of `tau_r` at `t`.
pub fn fpt_density(mu: f64, a: f64, r: f64, t: f64, inv: &InversionControl) -> Result<f64> {
    Ok(passage("fpt_density", mu, a, r)?.density(t, inv)?.value)
}

/// `P(tau_r <= t)`.
pub fn fpt_cdf(mu: f64, a: f64, r: f64, t: f64, inv: &InversionControl) -> Result<f64> {
    Ok(passage("fpt_cdf", mu, a, r)?.split(t, 0.0, inv)?.0)
}

/// `P(t < tau_r < inf)`.
pub fn fpt_tail(mu: f64, a: f64, r: f64, t: f64, inv: &InversionControl) -> Result<f64> {
    Ok(passage("fpt_tail", mu, a, r)?.split(t, 0.0, inv)?.1)
}

fn check_exterior(op: &'static str, a: f64, r: f64) -> Result<()> {
    if !(r > 0.0) || !(a > r) || !a.is_finite() {
        return Err(Error::domain(op, format!("need a > r > 0, got a={a}, r={r}")));
    }
    Ok(())
}

fn check_positive_order(op: &'static str, nu: f64) -> Result<()> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::domain(op, format!("index must be finite and > 0, got {nu}")));
    }
    Ok(())
}

/// `kappa = (r^3/(2a))^nu ((a/r)^nu - (a/r)^{-nu}) / Gamma(nu+1)`.
pub fn kappa(nu: f64, a: f64, r: f64) -> Result<f64> {
    const OP: &str = "kappa";
    check_exterior(OP, a, r)?;
    check_positive_order(OP, nu)?;
    let q = a / r;
    Ok((r.powi(3) / (2.0 * a)).powf(nu) * (q.powf(nu) - q.powf(-nu)) / libm::tgamma(nu + 1.0))
}

/// Leading-order tail `P(t < tau_r < inf)`: `2 log(a/r) / log t` for
/// `nu = 0`, `kappa t^{-nu}` otherwise.
pub fn fpt_tail_asymptotic(nu: f64, a: f64, r: f64, t: f64) -> Result<f64> {
    const OP: &str = "fpt_tail_asymptotic";
    check_exterior(OP, a, r)?;
    if !(nu >= 0.0) {
        return Err(Error::domain(OP, format!("index must be >= 0, got {nu}")));
    }
    if nu == 0.0 {
        if !(t > 1.0) {
            return Err(Error::domain(OP, format!("need t > 1 in the plane, got {t}")));
        }
        return Ok(2.0 * (a / r).ln() / t.ln());
    }
    check_time(OP, t)?;
    Ok(kappa(nu, a, r)? * t.powf(-nu))
}

/// Uniform bound `P(t < tau_r < inf) <= r^{2 nu} / (2^nu Gamma(nu+1) t^nu)`.
pub fn fpt_tail_bound(nu: f64, r: f64, t: f64) -> Result<f64> {
    const OP: &str = "fpt_tail_bound";
    check_positive_order(OP, nu)?;
    if !(r > 0.0) {
        return Err(Error::domain(OP, format!("r must be > 0, got {r}")));
    }
    check_time(OP, t)?;
    Ok((2.0 * nu * r.ln() - nu * 2f64.ln() - libm::lgamma(nu + 1.0) - nu * t.ln()).exp())
}

/// `L(nu) = r^{2 nu} (1 - (r/a)^{2 nu}) / (2^nu Gamma(nu))`.
pub fn l_const(nu: f64, a: f64, r: f64) -> Result<f64> {
    const OP: &str = "l_const";
    check_exterior(OP, a, r)?;
    check_positive_order(OP, nu)?;
    Ok(r.powf(2.0 * nu) / (2f64.powf(nu) * libm::tgamma(nu))
        * (1.0 - (r / a).powf(2.0 * nu)))
}

fn check_speed(op: &'static str, speed: f64) -> Result<()> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::domain(op, format!("speed must be finite and > 0, got {speed}")));
    }
    Ok(())
}

/// `H(t) = int_t^inf e^{-speed^2 s/2} rho(s) ds` for the index-`nu`
/// passage from `a` to `r`.
pub fn h_exp_tail(nu: f64, a: f64, r: f64, speed: f64, t: f64, inv: &InversionControl) -> Result<f64> {
    let alpha = 0.5 * speed * speed;
    Ok((h_exp_tail_scaled_ln(nu, a, r, speed, t, inv)? - alpha * t).exp())
}

/// `ln(e^{speed^2 t/2} H(t))`, which stays representable for large `t`.
pub fn h_exp_tail_scaled_ln(nu: f64, a: f64, r: f64, speed: f64, t: f64, inv: &InversionControl) -> Result<f64> {
    const OP: &str = "h_exp_tail";
    check_speed(OP, speed)?;
    passage(OP, nu, a, r)?.weighted_tail_scaled_ln(t, 0.5 * speed * speed, inv)
}

/// Leading-order `H(t)`: `2 log(a/r) e^{-alpha t} / (t (log t)^2)` for
/// `nu = 0`, `2 L(nu) e^{-alpha t} / (speed^2 t^{nu+1})` otherwise, with
/// `alpha = speed^2/2`.
pub fn h_exp_tail_asymptotic(nu: f64, a: f64, r: f64, speed: f64, t: f64) -> Result<f64> {
    const OP: &str = "h_exp_tail_asymptotic";
    check_exterior(OP, a, r)?;
    check_speed(OP, speed)?;
    if !(t > 1.0) {
        return Err(Error::domain(OP, format!("need t > 1, got {t}")));
    }
    let alpha = 0.5 * speed * speed;
    if nu == 0.0 {
        return Ok(2.0 * (a / r).ln() / (t * t.ln().powi(2)) * (-alpha * t).exp());
    }
    Ok(2.0 * l_const(nu, a, r)? / (speed * speed) * t.powf(-nu - 1.0) * (-alpha * t).exp())
}

/// Explicit bound on `H(t)` valid in dimensions `d >= 5` (`nu >= 3/2`):
/// `e^{-alpha t} (2t)^{-nu-1} [2 r^{2nu}/(alpha Gamma(nu)) + 2 r^{2nu+2} (1/d + 1/(d-4))/Gamma(nu+1)]`.
pub fn h_exp_tail_bound(nu: f64, r: f64, speed: f64, t: f64) -> Result<f64> {
    const OP: &str = "h_exp_tail_bound";
    check_speed(OP, speed)?;
    check_time(OP, t)?;
    if !(nu >= 1.5) || (2.0 * nu).fract() != 0.0 {
        return Err(Error::domain(OP, format!("needs a dimension >= 5, i.e. nu in {{3/2, 2, ...}}, got {nu}")));
    }
    let d = 2.0 * nu + 2.0;
    let alpha = 0.5 * speed * speed;
    let c = 2.0 * r.powf(2.0 * nu) / (alpha * libm::tgamma(nu))
        + 2.0 * r.powf(2.0 * nu + 2.0) * (1.0 / d + 1.0 / (d - 4.0)) / libm::tgamma(nu + 1.0);
    Ok(c * (2.0 * t).powf(-nu - 1.0) * (-alpha * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn laplace_examples() {
        let v = fpt_laplace(0.5, 2.0, 1.0, 0.5).unwrap();
        assert!((v - 0.5 * (-1f64).exp()).abs() < 1e-15);
        assert!((fpt_laplace(1.0, 2.0, 1.0, 1e-12).unwrap() - 0.25).abs() < 1e-6);
        assert!((fpt_laplace(2.0, 0.5, 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(fpt_laplace(1.0, 2.0, 1.0, 0.0).is_err());
        let mut last = 1.0;
        for k in 0..34 {
            let v = fpt_laplace(1.5, 3.0, 1.0, 0.01 * 1.5f64.powi(k)).unwrap();
            assert!(v < last && v > 0.0);
            last = v;
        }
    }

    #[test]
    fn half_order_golden() {
        let inv = InversionControl::default();
        let d = fpt_density(0.5, 2.0, 1.0, 1.0, &inv).unwrap();
        let exact = 0.5 / (2.0 * std::f64::consts::PI).sqrt() * (-0.5f64).exp();
        assert!(((d - exact) / exact).abs() < 1e-10);
        let c = fpt_cdf(0.5, 2.0, 1.0, 1.0, &inv).unwrap();
        assert!(((c - 0.5 * 2.0 * (1.0 - phi(1.0))) / c).abs() < 1e-10);
        let q = fpt_tail(0.5, 2.0, 1.0, 4.0, &inv).unwrap();
        assert!(((q - 0.5 * (2.0 * phi(0.5) - 1.0)) / q).abs() < 1e-10);
    }

    #[test]
    fn constants() {
        assert!((kappa(0.5, 2.0, 1.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert!((kappa(1.0, 2.0, 1.0).unwrap() - 0.375).abs() < 1e-14);
        assert!(kappa(1.0, 1.0, 2.0).is_err());
        assert!(kappa(1.0, 1.0 + 1e-9, 1.0).unwrap() < 1e-8);
        assert!((l_const(1.0, 2.0, 1.0).unwrap() - 0.375).abs() < 1e-14);
        assert!((l_const(0.5, 2.0, 1.0).unwrap() - 0.199_471_140_200_716_3).abs() < 1e-12);
        assert!((l_const(1.0, 1e12, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((fpt_tail_bound(0.5, 1.0, 1.0).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((fpt_tail_bound(1.0, 1.0, 2.0).unwrap() - 0.25).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((fpt_tail_asymptotic(0.0, e, 1.0, e.powi(4)).unwrap() - 0.5).abs() < 1e-15);
        assert!((fpt_tail_asymptotic(1.0, 2.0, 1.0, 10.0).unwrap() - 0.0375).abs() < 1e-15);
        assert!((fpt_tail_asymptotic(0.5, 2.0, 1.0, 100.0).unwrap() - 0.039_894_228_040_143_27).abs() < 1e-13);
        assert!(fpt_tail_asymptotic(0.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn weighted_split_sums_to_transform() {
        let inv = InversionControl::default();
        for (mu, a) in [(0.0, 0.5), (1.0, 2.0), (0.5, 3.0), (2.5, 0.3)] {
            let fp = FirstPassage::new(mu, a, 1.0).unwrap();
            for &alpha in &[0.0, 0.3, 2.0] {
                for &t in &[0.05, 0.7, 6.0] {
                    let (lo, hi) = fp.split(t, alpha, &inv).unwrap();
                    assert!(((lo + hi) - fp.laplace(alpha)).abs() < 1e-14);
                    assert!(lo >= 0.0 && hi >= 0.0);
                }
            }
        }
    }

    #[test]
    fn weighted_tail_small_speed_matches_tail() {
        let inv = InversionControl::default();
        let h = h_exp_tail(1.0, 2.0, 1.0, 1e-5, 3.0, &inv).unwrap();
        let q = fpt_tail(1.0, 2.0, 1.0, 3.0, &inv).unwrap();
        assert!(((h - q) / q).abs() < 1e-8);
    }
}
