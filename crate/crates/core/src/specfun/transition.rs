//! Transition density of the first coordinate `x = z_1/r` of spherical
//! Brownian motion, with respect to `dm(x) = 2 (1-x^2)^{(d-3)/2} dx`.

use crate::error::{Error, Result};
use crate::series::{sum_series, SeriesControl, SeriesValue};

use super::{gegenbauer_at_one, order_of_dimension, zonal_all};

/// Squared normalizing factor `k_n^2` making `k_n P_n` orthonormal in `dm`,
/// in log form.
fn ln_norm_sq(d: u32, n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    if d == 2 {
        return if n == 0 { -(2.0 * pi).ln() } else { -pi.ln() };
    }
    let nu = order_of_dimension(d);
    let nf = n as f64;
    (nf + nu).ln() + libm::lgamma(nf + 1.0) - pi.ln() - libm::lgamma(nf + 2.0 * nu)
        + (nu - 1.0) * 4f64.ln()
        + 2.0 * libm::lgamma(nu)
}

/// `p_d(t, x, y)`, the transition density of the projected process.
pub fn projected_transition_density(d: u32, t: f64, x: f64, y: f64, ctrl: &SeriesControl) -> Result<SeriesValue> {
    const OP: &str = "projected_transition_density";
    if d < 2 {
        return Err(Error::domain(OP, format!("dimension must be >= 2, got {d}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(OP, format!("t must be finite and > 0, got {t}")));
    }
    if !(x.abs() <= 1.0) || !(y.abs() <= 1.0) {
        return Err(Error::domain(OP, format!("need |x|, |y| <= 1, got ({x}, {y})")));
    }
    let nu = order_of_dimension(d);
    let n_cap = ctrl.n_max;
    let mut px = Vec::new();
    let mut py = Vec::new();
    let mut filled = 0usize;
    let eig = |n: usize| {
        let nf = n as f64;
        nf * (nf + 2.0 * nu) * t / 2.0
    };
    let bound = |n: usize| {
        let one = if d == 2 { 1.0 } else { gegenbauer_at_one(n, nu) };
        (ln_norm_sq(d, n) - eig(n)).exp() * one * one
    };
    sum_series(OP, ctrl, bound, |n| {
        if n >= filled {
            filled = (2 * filled).max(32).min(n_cap + 1).max(n + 1);
            zonal_all(d, x, &mut px, filled - 1);
            zonal_all(d, y, &mut py, filled - 1);
        }
        Ok((ln_norm_sq(d, n) - eig(n)).exp() * px[n] * py[n])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    fn dm_integral<F: Fn(f64) -> f64>(d: u32, f: F) -> f64 {
        // x = cos(theta): dm = 2 sin^{d-2}(theta) d theta
        quadrature::adaptive(
            |th: f64| 2.0 * th.sin().powi(d as i32 - 2) * f(th.cos()),
            0.0,
            std::f64::consts::PI,
            1e-13,
        )
        .value
    }

    #[test]
    fn long_time_limit_d2() {
        let ctrl = SeriesControl::default();
        let p = projected_transition_density(2, 60.0, 0.3, -0.8, &ctrl).unwrap();
        assert!((p.value - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn normalized_and_symmetric() {
        let ctrl = SeriesControl::default();
        for d in [2u32, 3, 4, 6] {
            for &t in &[0.05, 0.5, 2.0] {
                let x = 0.37;
                let total = dm_integral(d, |y| projected_transition_density(d, t, x, y, &ctrl).unwrap().value);
                assert!((total - 1.0).abs() < 1e-8, "d={d} t={t} total={total}");
                let a = projected_transition_density(d, t, x, -0.6, &ctrl).unwrap().value;
                let b = projected_transition_density(d, t, -0.6, x, &ctrl).unwrap().value;
                assert!((a - b).abs() < 1e-13 * a.abs().max(1.0));
                assert!(a >= -1e-12);
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let ctrl = SeriesControl::default();
        for d in [2u32, 3, 5] {
            let (x, y) = (1.0, 0.2);
            let direct = projected_transition_density(d, 0.5, x, y, &ctrl).unwrap().value;
            let composed = dm_integral(d, |u| {
                projected_transition_density(d, 0.25, x, u, &ctrl).unwrap().value
                    * projected_transition_density(d, 0.25, u, y, &ctrl).unwrap().value
            });
            assert!((direct - composed).abs() < 1e-8, "d={d}: {direct} vs {composed}");
        }
    }
}
