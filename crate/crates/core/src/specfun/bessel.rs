//! Modified Bessel functions of real order and complex argument.
//!
//! Everything is computed in log form so that ratios such as
//! `I_mu(a z) / I_mu(r z)` can be formed for arguments far outside the
//! range where the functions themselves are representable.
//!
//! * `K`: Temme's series for `|z| <= 2`, Steed's continued fraction
//!   otherwise, on the order reduced to `|mu| <= 1/2`, followed by the
//!   (stable) upward recurrence.
//! * `I`: power series for small `|z|` relative to the order, Hankel's
//!   expansion when `|z|` dominates the order, and otherwise the
//!   Wronskian `I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z` with the ratio
//!   `I_{nu+1}/I_nu` from its continued fraction.
//!
//! All routines assume `Re z > 0` or `z` real positive.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-150;
const MAX_ITER: usize = 200_000;

/// Taylor coefficients `c_k` of `1/Gamma(z) = sum_{k>=1} c_k z^k`.
const RGAMMA: [f64; 31] = [
    0.0,
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
];

/// Temme's auxiliary gammas for `|x| <= 1/2`:
/// `(gam1, gam2, 1/Gamma(1+x), 1/Gamma(1-x))`.
fn temme_gammas(x: f64) -> (f64, f64, f64, f64) {
    let x2 = x * x;
    // gam2 = sum over odd k of c_k x^(k-1); gam1 = -sum over even k of c_k x^(k-2)
    let mut gam2 = 0.0;
    let mut k = 29;
    while k >= 1 {
        gam2 = gam2 * x2 + RGAMMA[k];
        if k < 2 {
            break;
        }
        k -= 2;
    }
    let mut gam1 = 0.0;
    let mut k = 30;
    while k >= 2 {
        gam1 = gam1 * x2 + RGAMMA[k];
        k -= 2;
    }
    gam1 = -gam1;
    (gam1, gam2, gam2 - x * gam1, gam2 + x * gam1)
}

/// `e^z K_mu(z)` and `e^z K_{mu+1}(z)` for `|mu| <= 1/2`, `|z| <= 2`.
fn k_pair_temme(mu: f64, z: C64) -> (C64, C64) {
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let x2 = z * 0.5;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = d * mu;
    let fact2 = if e.norm() < EPS { C64::new(1.0, 0.0) } else { e.sinh() / e };
    let mut ff = (e.cosh() * gam1 + fact2 * d * gam2) * fact;
    let mut sum = ff;
    let ee = e.exp();
    let mut p = ee * (0.5 / gampl);
    let mut q = (ee * gammi).inv() * 0.5;
    let mut c = C64::new(1.0, 0.0);
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (ff * fi + p + q) / (fi * fi - mu * mu);
        c = c * dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - ff * fi);
        sum1 += del1;
        if del.norm() < sum.norm() * EPS {
            break;
        }
    }
    let scale = z.exp();
    (sum * scale, sum1 * (z * 0.5).inv() * scale)
}

/// `e^z K_mu(z)` and `e^z K_{mu+1}(z)` for `|mu| <= 1/2`, `|z| > 2`.
fn k_pair_steed(mu: f64, z: C64) -> (C64, C64) {
    let mut b = (z + 1.0) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = C64::new(1.0, 0.0);
    let a1 = 0.25 - mu * mu;
    let mut q = C64::new(a1, 0.0);
    let mut c = C64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = q * delh + 1.0;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -c * a / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).norm() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::FRAC_PI_2 / z).sqrt() / s;
    let k1 = k0 * (z + mu + 0.5 - h) / z;
    (k0, k1)
}

/// `(ln K_nu(z), K_{nu+1}(z)/K_nu(z))` for `nu >= 0`.
pub(crate) fn ln_k_with_ratio(nu: f64, z: C64) -> (C64, C64) {
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (k0, k1) = if z.norm() <= 2.0 {
        k_pair_temme(mu, z)
    } else {
        k_pair_steed(mu, z)
    };
    let mut ln_k = k0.ln() - z;
    let mut q = k1 / k0;
    let mut prod = C64::new(1.0, 0.0);
    for i in 1..=(nl as usize) {
        prod *= q;
        let n = prod.norm();
        if !(1e-200..=1e200).contains(&n) {
            ln_k += prod.ln();
            prod = C64::new(1.0, 0.0);
        }
        q = (z * 0.5).inv() * (mu + i as f64) + q.inv();
    }
    ln_k += prod.ln();
    (ln_k, q)
}

/// `ln K_nu(z)`.
pub fn ln_bessel_k_complex(nu: f64, z: C64) -> C64 {
    ln_k_with_ratio(nu, z).0
}

/// `ln(1 + c)` without losing the digits of a small `c`.
pub(crate) fn ln_1p(c: C64) -> C64 {
    let re = 0.5 * libm::log1p(c.re * (2.0 + c.re) + c.im * c.im);
    C64::new(re, c.im.atan2(1.0 + c.re))
}

/// `e^c - 1` without losing the digits of a small `c`.
pub(crate) fn exp_m1(c: C64) -> C64 {
    let (s, co) = c.im.sin_cos();
    let half = (0.5 * c.im).sin();
    C64::new(libm::expm1(c.re) * co - 2.0 * half * half, c.re.exp() * s)
}

/// `ln(K_nu(x) / (Gamma(nu)/2 (2/x)^nu))` for `nu > 0`, `|x| <= 1`:
/// the deviation of `K_nu` from its leading small-argument term, to full
/// relative accuracy. `None` when `nu` is within `1e-3` of a nonzero
/// integer without being one.
pub(crate) fn ln_k_small_correction(nu: f64, x: C64) -> Option<C64> {
    let half = x * 0.5;
    let w = half * half;
    let ln_half = half.ln();
    let m = nu.round();
    let corr = if nu == m {
        let m = m as usize;
        let mut finite = C64::new(0.0, 0.0);
        let mut c = 1.0;
        let mut p = C64::new(1.0, 0.0);
        for k in 1..m {
            c /= (k * (m - k)) as f64;
            p *= -w;
            finite += p * c;
        }
        // log part: (x/2)^{2m}/(m-1)! (-1)^m [S2 - 2 ln(x/2) S1]
        let mut term = C64::new(1.0 / libm::tgamma(m as f64 + 1.0), 0.0);
        let mut psi = -0.577_215_664_901_532_9 * 2.0 + (1..=m).map(|j| 1.0 / j as f64).sum::<f64>();
        let mut s1 = term;
        let mut s2 = term * psi;
        for k in 1..200 {
            let fk = k as f64;
            term = term * w / (fk * (fk + m as f64));
            psi += 1.0 / fk + 1.0 / (fk + m as f64);
            s1 += term;
            s2 += term * psi;
            if term.norm() * (1.0 + psi.abs()) < 1e-18 * s1.norm() {
                break;
            }
        }
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let pre = (ln_half * (2.0 * m as f64)).exp() * (sign / libm::tgamma(m as f64));
        finite + pre * (s2 - ln_half * s1 * 2.0)
    } else {
        if (nu - m).abs() < 1e-3 {
            return None;
        }
        let mut a = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 1..200 {
            let fk = k as f64;
            term = term * w / (fk * (fk - nu));
            a += term;
            if term.norm() < 1e-18 * a.norm() {
                break;
            }
        }
        let mut b = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0 / libm::tgamma(nu + 1.0), 0.0);
        b += term;
        for k in 1..200 {
            let fk = k as f64;
            term = term * w / (fk * (fk + nu));
            b += term;
            if term.norm() < 1e-18 * b.norm() {
                break;
            }
        }
        a - (ln_half * (2.0 * nu)).exp() * libm::tgamma(1.0 - nu) * b
    };
    Some(ln_1p(corr))
}

/// `I_{nu+1}(z)/I_nu(z)` by the continued fraction (modified Lentz).
fn i_ratio_cf(nu: f64, z: C64) -> C64 {
    let zi2 = (z * 0.5).inv();
    let mut f = C64::new(FPMIN, 0.0);
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for j in 1..MAX_ITER {
        let b = zi2 * (nu + j as f64);
        d = b + d;
        if d.norm() < FPMIN {
            d = C64::new(FPMIN, 0.0);
        }
        c = b + c.inv();
        if c.norm() < FPMIN {
            c = C64::new(FPMIN, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < EPS {
            break;
        }
    }
    f
}

fn ln_i_series(nu: f64, z: C64) -> C64 {
    let q = z * z * 0.25;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..MAX_ITER {
        let fk = k as f64;
        term = term * q / (fk * (nu + fk));
        sum += term;
        if term.norm() < sum.norm() * EPS {
            break;
        }
    }
    (z * 0.5).ln() * nu - libm::lgamma(nu + 1.0) + sum.ln()
}

/// Hankel expansion of `I_nu(z)` with the exponentially small companion
/// dropped; used only when that companion is below rounding.
fn ln_i_hankel(nu: f64, z: C64) -> Option<C64> {
    let m = 4.0 * nu * nu;
    let zi = z.inv();
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let fk = k as f64;
        let odd = 2.0 * fk - 1.0;
        term = -term * zi * ((m - odd * odd) / (8.0 * fk));
        let tn = term.norm();
        if tn > last {
            return None;
        }
        last = tn;
        sum += term;
        if tn < EPS * sum.norm() {
            return Some(z - (z * std::f64::consts::TAU).ln() * 0.5 + sum.ln());
        }
    }
    None
}

/// `ln I_nu(z)` for `nu >= 0` and `Re z > 0` (or `z = 0`).
pub fn ln_bessel_i_complex(nu: f64, z: C64) -> C64 {
    let an = z.norm();
    if an == 0.0 {
        return if nu == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(f64::NEG_INFINITY, 0.0)
        };
    }
    if an <= 2.0 || an * an <= 2.0 * (nu + 1.0) {
        return ln_i_series(nu, z);
    }
    if z.re >= 20.0 && an >= 40.0 && an >= nu * nu {
        if let Some(v) = ln_i_hankel(nu, z) {
            return v;
        }
    }
    let (ln_k, qk) = ln_k_with_ratio(nu, z);
    let rho = i_ratio_cf(nu, z);
    -z.ln() - ln_k - (qk + rho).ln()
}

fn check_args(op: &'static str, nu: f64, x: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain(op, format!("order must be finite and >= 0, got {nu}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(op, format!("argument must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// Modified Bessel function of the first kind, `I_nu(x)`;
/// with `scaled` returns `e^{-x} I_nu(x)`.
pub fn bessel_i(nu: f64, x: f64, scaled: bool) -> Result<f64> {
    check_args("bessel_i", nu, x)?;
    let mut l = ln_bessel_i_complex(nu, C64::new(x, 0.0)).re;
    if scaled {
        l -= x;
    }
    Ok(l.exp())
}

/// Modified Bessel function of the second kind, `K_nu(x)`;
/// with `scaled` returns `e^{x} K_nu(x)`.
pub fn bessel_k(nu: f64, x: f64, scaled: bool) -> Result<f64> {
    check_args("bessel_k", nu.abs(), x)?;
    let mut l = ln_bessel_k_complex(nu.abs(), C64::new(x, 0.0)).re;
    if scaled {
        l += x;
    }
    Ok(l.exp())
}

/// `Gamma(nu+1) (x/2)^{-nu} I_nu(x)`, equal to 1 at `x = 0`.
pub(crate) fn normalized_bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x * x <= 4.0 * (nu + 1.0) {
        let q = x * x * 0.25;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..MAX_ITER {
            let fk = k as f64;
            term *= q / (fk * (nu + fk));
            sum += term;
            if term < sum * EPS {
                break;
            }
        }
        return sum;
    }
    let l = ln_bessel_i_complex(nu, C64::new(x, 0.0)).re;
    (libm::lgamma(nu + 1.0) - nu * (0.5 * x).ln() + l).exp()
}
