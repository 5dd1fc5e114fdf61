//! Special functions and integration over rotationally symmetric bands of
//! the sphere.
//!
//! A band is `{z : z_1/r in [x_lo, x_hi]}`. On the unit sphere in `R^d`
//! the coordinate `x = z_1/r` of a uniform point has density
//! `w_d(x) = c_d (1-x^2)^{(d-3)/2}` on `[-1, 1]`, `c_d = 1/int_0^pi sin^{d-2}`.

mod bessel;
mod transition;

pub use bessel::{bessel_i, bessel_k, ln_bessel_i_complex, ln_bessel_k_complex};
pub(crate) use bessel::{exp_m1, ln_k_small_correction, ln_k_with_ratio, normalized_bessel_i};
pub use transition::projected_transition_density;

pub use crate::series::{SeriesControl, SeriesValue};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Index `nu = (d-2)/2` of the radial Bessel process in dimension `d`.
pub fn order_of_dimension(d: u32) -> f64 {
    (d as f64 - 2.0) / 2.0
}

/// Subset of the sphere `{z : z_1/r in [lo, hi]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::domain("Band", format!("need -1 <= lo <= hi <= 1, got [{lo}, {hi}]")));
        }
        Ok(Band { lo, hi })
    }

    /// The whole sphere.
    pub fn full() -> Self {
        Band { lo: -1.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_full(&self) -> bool {
        self.lo == -1.0 && self.hi == 1.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Polar angles `(theta_hi, theta_lo)` with `theta = acos x`, ascending.
    fn angles(&self) -> (f64, f64) {
        (self.hi.acos(), self.lo.acos())
    }
}

fn check_dim(op: &'static str, d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(op, format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// Gegenbauer polynomial `C_n^nu(x)` by the three-term recurrence.
pub fn gegenbauer(n: usize, nu: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::domain("gegenbauer", format!("order must be > 0, got {nu}")));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::domain("gegenbauer", format!("|x| must be <= 1, got {x}")));
    }
    Ok(gegenbauer_unchecked(n, nu, x))
}

pub(crate) fn gegenbauer_unchecked(n: usize, nu: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * nu * x;
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * (kf - 1.0 + nu) * x * c1 - (kf - 2.0 + 2.0 * nu) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// `C_n^nu(1) = Gamma(n+2nu) / (n! Gamma(2nu))`, evaluated in log space.
pub fn gegenbauer_at_one(n: usize, nu: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (libm::lgamma(nf + 2.0 * nu) - libm::lgamma(nf + 1.0) - libm::lgamma(2.0 * nu)).exp()
}

/// Smallest `C` with `C_n^nu(1) <= C n^{2nu-1}` for `1 <= n <= n_max`.
pub fn gegenbauer_growth_constant(nu: f64, n_max: usize) -> f64 {
    (1..=n_max.max(1))
        .map(|n| gegenbauer_at_one(n, nu) / (n as f64).powf(2.0 * nu - 1.0))
        .fold(0.0, f64::max)
}

/// Chebyshev polynomial `T_n(x)`.
pub fn chebyshev_t(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut t0 = 1.0;
    let mut t1 = x;
    for _ in 2..=n {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// Chebyshev polynomial of the second kind `U_n(x)`.
fn chebyshev_u(n: usize, x: f64) -> f64 {
    let mut u0 = 1.0;
    if n == 0 {
        return u0;
    }
    let mut u1 = 2.0 * x;
    for _ in 2..=n {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

/// Zonal polynomial of degree `n` in dimension `d`: `T_n` for `d = 2`,
/// `C_n^nu` otherwise.
pub fn zonal(d: u32, n: usize, x: f64) -> f64 {
    if d == 2 {
        chebyshev_t(n, x)
    } else {
        gegenbauer_unchecked(n, order_of_dimension(d), x)
    }
}

/// `P_n(1)` for the zonal polynomial in dimension `d`.
pub fn zonal_at_one(d: u32, n: usize) -> f64 {
    if d == 2 {
        1.0
    } else {
        gegenbauer_at_one(n, order_of_dimension(d))
    }
}

/// Coefficient of the degree-`n` zonal term in the harmonic expansion:
/// `1, 2, 2, ...` for `d = 2` and `(n + nu)/nu` otherwise.
pub fn zonal_weight(d: u32, n: usize) -> f64 {
    if d == 2 {
        if n == 0 {
            1.0
        } else {
            2.0
        }
    } else {
        let nu = order_of_dimension(d);
        (n as f64 + nu) / nu
    }
}

/// Evaluates `P_0(x), ..., P_n(x)` into `out`.
pub(crate) fn zonal_all(d: u32, x: f64, out: &mut Vec<f64>, n: usize) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    if d == 2 {
        out.push(x);
        for k in 2..=n {
            let v = 2.0 * x * out[k - 1] - out[k - 2];
            out.push(v);
        }
    } else {
        let nu = order_of_dimension(d);
        out.push(2.0 * nu * x);
        for k in 2..=n {
            let kf = k as f64;
            let v = (2.0 * (kf - 1.0 + nu) * x * out[k - 1] - (kf - 2.0 + 2.0 * nu) * out[k - 2]) / kf;
            out.push(v);
        }
    }
}

/// `Lambda_m(rho)`: the average of `e^{<w, xi>}` over the unit sphere in
/// `R^m`, `|w| = rho`. `Lambda_1 = cosh`.
pub fn sphere_exp_average(m: u32, rho: f64) -> f64 {
    if m <= 1 {
        return rho.cosh();
    }
    normalized_bessel_i(m as f64 / 2.0 - 1.0, rho.abs())
}

/// `int_0^theta sin^m` for `0 <= theta <= pi`.
fn sin_power_integral(m: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut prev = theta;
    let mut cur = 1.0 - c;
    if m == 0 {
        return prev;
    }
    let mut sp = 1.0; // sin^{k-1} for the current k
    for k in 2..=m {
        sp *= s;
        let kf = k as f64;
        let next = -sp * c / kf + (kf - 1.0) / kf * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Uniform-measure mass of a band on the sphere in `R^d`.
pub fn band_measure(d: u32, band: &Band) -> f64 {
    if band.is_degenerate() {
        return 0.0;
    }
    let m = d.saturating_sub(2);
    let (th_hi, th_lo) = band.angles();
    let total = sin_power_integral(m, std::f64::consts::PI);
    ((sin_power_integral(m, th_lo) - sin_power_integral(m, th_hi)) / total).clamp(0.0, 1.0)
}

/// `c_d = 1 / int_0^pi sin^{d-2}`, the normalizing constant of `w_d`.
pub(crate) fn weight_constant(d: u32) -> f64 {
    1.0 / sin_power_integral(d.saturating_sub(2), std::f64::consts::PI)
}

/// Density `w_d(x)` of `z_1/r` under the uniform measure on the sphere.
pub fn band_weight(d: u32, x: f64) -> f64 {
    let one_minus = (1.0 - x) * (1.0 + x);
    weight_constant(d) * one_minus.powf((d as f64 - 3.0) / 2.0)
}

/// `int_band P_n(x) w_d(x) dx` in closed form.
pub fn poly_band_integral(d: u32, n: usize, band: &Band) -> f64 {
    if n == 0 {
        return band_measure(d, band);
    }
    if band.is_degenerate() || band.is_full() {
        return 0.0;
    }
    let nf = n as f64;
    let sq = |x: f64| ((1.0 - x) * (1.0 + x)).max(0.0);
    if d == 2 {
        // sin(n acos x) = sqrt(1-x^2) U_{n-1}(x)
        let g = |x: f64| sq(x).sqrt() * chebyshev_u(n - 1, x);
        (g(band.lo) - g(band.hi)) / (nf * std::f64::consts::PI)
    } else {
        let nu = order_of_dimension(d);
        let g = |x: f64| sq(x).powf(nu + 0.5) * gegenbauer_unchecked(n - 1, nu + 1.0, x);
        weight_constant(d) * 2.0 * nu / (nf * (nf + 2.0 * nu)) * (g(band.lo) - g(band.hi))
    }
}

/// `int_band e^{c1 x} Lambda_{d-1}(c_perp sqrt(1-x^2)) P_n(x) w_d(x) dx`,
/// i.e. the band integral of `e^{<c, z>} P_n(z_1)` for `|z| = 1` with `c`
/// split into its axial part `c1` and orthogonal magnitude `c_perp`.
pub fn exp_poly_band_integral(d: u32, n: usize, band: &Band, c1: f64, c_perp: f64) -> Result<f64> {
    check_dim("exp_poly_band_integral", d)?;
    if !(c_perp >= 0.0) || !c1.is_finite() || !c_perp.is_finite() {
        return Err(Error::domain(
            "exp_poly_band_integral",
            format!("need finite c1 and c_perp >= 0, got ({c1}, {c_perp})"),
        ));
    }
    if c1 == 0.0 && c_perp == 0.0 {
        return Ok(poly_band_integral(d, n, band));
    }
    if band.is_degenerate() {
        return Ok(0.0);
    }
    if band.is_full() {
        return Ok(exp_poly_sphere_average(d, n, c1, c_perp));
    }
    let cd = weight_constant(d);
    let m = d - 2;
    let nu = order_of_dimension(d);
    let integrand = |th: f64| {
        let (s, x) = th.sin_cos();
        let tilt = (c1 * x).exp() * if c_perp == 0.0 { 1.0 } else { sphere_exp_average(d - 1, c_perp * s) };
        let p = if d == 2 { (n as f64 * th).cos() } else { gegenbauer_unchecked(n, nu, x) };
        cd * s.powi(m as i32) * tilt * p
    };
    let (th_hi, th_lo) = band.angles();
    let scale = (c1.abs() + c_perp).exp() * zonal_at_one(d, n);
    let tol = (1e-12f64).max(1e-15 * scale);
    let panels = 1 + (n as f64 * (th_lo - th_hi) / std::f64::consts::PI / 4.0).ceil() as usize;
    let h = (th_lo - th_hi) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = th_hi + h * p as f64;
        let b = if p + 1 == panels { th_lo } else { a + h };
        total += quadrature::adaptive(integrand, a, b, tol / panels as f64).value;
    }
    Ok(total)
}

/// Funk-Hecke: the sphere average of `e^{<c, z>} P_n(z_1)` is
/// `Gamma(nu+1) (2/|c|)^nu I_{n+nu}(|c|) P_n(c1/|c|)`.
fn exp_poly_sphere_average(d: u32, n: usize, c1: f64, c_perp: f64) -> f64 {
    let c = c1.hypot(c_perp);
    let cos = (c1 / c).clamp(-1.0, 1.0);
    if d == 2 {
        let ln_i = ln_bessel_i_complex(n as f64, C64::new(c, 0.0)).re;
        return ln_i.exp() * (n as f64 * cos.acos()).cos();
    }
    let nu = order_of_dimension(d);
    let ln_i = ln_bessel_i_complex(n as f64 + nu, C64::new(c, 0.0)).re;
    let ln_pre = libm::lgamma(nu + 1.0) + nu * (2.0 / c).ln();
    (ln_pre + ln_i).exp() * gegenbauer_unchecked(n, nu, cos)
}
