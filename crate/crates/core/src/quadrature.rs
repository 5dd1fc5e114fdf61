//! Gauss–Legendre rules and an adaptive integrator built on them.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

/// Fixed 20-point rule on `[a, b]`.
pub fn gl20<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = rule20();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + h * xi);
    }
    s * h
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Adaptive bisection with a 20-point Gauss–Legendre rule, stopping each
/// panel when splitting changes it by less than its share of `abs_tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    let total = (b - a).abs();
    let whole = gl20(&mut f, a, b);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl20(&mut f, lo, mid);
        let right = gl20(&mut f, mid, hi);
        let diff = (left + right - est).abs();
        let share = abs_tol * (hi - lo).abs() / total;
        if diff <= share.max(1e-15 * (left + right).abs()) || depth >= 40 {
            value += left + right;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Integral { value, error }
}

/// Adaptive integration over `[a, inf)` via `s = a + u/(1-u)`.
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64) -> Integral {
    adaptive(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let om = 1.0 - u;
            f(a + u / om) / (om * om)
        },
        0.0,
        1.0,
        abs_tol,
    )
}
