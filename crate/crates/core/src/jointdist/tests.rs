use super::*;
use crate::fpt::{fpt_density, fpt_laplace, fpt_tail};
use crate::quadrature;
use crate::specfun::band_weight;

fn geom(d: u32, r: f64, a: f64) -> Geometry {
    Geometry::new(d, r, a).unwrap()
}

fn band(lo: f64, hi: f64) -> Band {
    Band::new(lo, hi).unwrap()
}

fn ctrl() -> SeriesControl {
    SeriesControl::default()
}

fn inv() -> InversionControl {
    InversionControl::default()
}

#[test]
fn laplace_without_exponent_is_radial() {
    for (d, a) in [(2u32, 0.4), (3, 0.5), (3, 2.0), (5, 3.0), (2, 4.0)] {
        let g = geom(d, 1.0, a);
        for lambda in [0.1, 1.0, 7.0] {
            let s = joint_laplace(&g, lambda, 0.0, 0.0, &ctrl()).unwrap();
            let f = fpt_laplace(g.nu(), a, 1.0, lambda).unwrap();
            assert!((s.value - f).abs() <= 1e-14, "d={d} a={a}: {} vs {f}", s.value);
        }
    }
}

#[test]
fn laplace_decays_in_lambda() {
    let g = geom(3, 1.0, 0.5);
    let mut prev = f64::INFINITY;
    for lambda in [0.5, 5.0, 50.0, 500.0, 5e4] {
        let v = joint_laplace(&g, lambda, 0.3, 0.2, &ctrl()).unwrap().value;
        assert!(v < prev && v > 0.0);
        prev = v;
    }
    assert!(prev < 1e-20);
}

#[test]
fn laplace_at_zero_rate_is_exponential_moment_of_place() {
    // lambda -> 0: E[e^{<u, B_sigma>}] = int e^{r<u,xi>} kernel
    let g = geom(3, 1.0, 0.5);
    let (u1, up) = (0.4, 0.3);
    let series = joint_laplace(&g, 1e-12, u1, up, &ctrl()).unwrap().value;
    // axis-symmetric integral only sees u1 through the kernel; u_perp enters via Lambda_2
    let q = quadrature::adaptive(
        |x: f64| {
            let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
            poisson_kernel(&g, x) * band_weight(3, x) * (u1 * x).exp() * sphere_exp_average(2, up * s)
        },
        -1.0,
        1.0,
        1e-14,
    )
    .value;
    assert!((series - q).abs() < 1e-8, "{series} vs {q}");
}

#[test]
fn kernel_examples() {
    let s = 0.3;
    let v = poisson_kernel(&geom(2, 1.0, s), 1.0);
    assert!((v - (1.0 + s) / (1.0 - s)).abs() < 1e-14);
    let v = poisson_kernel(&geom(3, 1.0, 0.5), 1.0);
    assert!((v - 6.0).abs() < 1e-13);
    let h = hitting_place_density(&geom(3, 1.0, 0.5), 1.0, &ctrl()).unwrap();
    assert!((h.value - 6.0).abs() < 1e-10);
    let h = hitting_place_density(&geom(4, 1.0, 1e-6), -0.3, &ctrl()).unwrap();
    assert!((h.value - 1.0).abs() < 1e-5);
}

#[test]
fn place_series_matches_kernel() {
    for d in [2u32, 3, 4, 5, 7] {
        for a in [0.1, 0.6, 0.93, 1.06, 2.0, 4.8] {
            let g = geom(d, 1.0, a);
            for x in [-1.0, -0.4, 0.0, 0.5, 0.99, 1.0] {
                let s = hitting_place_density(&g, x, &ctrl()).unwrap();
                let k = poisson_kernel(&g, x);
                // near a/r = 1 the kernel reaches 1e7 and 1e-8 is below its resolution
                assert!((s.value - k).abs() <= 1e-8 * k.max(1.0), "d={d} a={a} x={x}: {} vs {k}", s.value);
            }
        }
    }
}

#[test]
fn kernel_integrates_to_mass() {
    for (d, a) in [(2u32, 3.0), (3, 2.0), (5, 0.7), (6, 1.5)] {
        let g = geom(d, 1.0, a);
        let m = quadrature::adaptive(
            |th: f64| poisson_kernel(&g, th.cos()) * band_weight(d, th.cos()) * th.sin(),
            0.0,
            std::f64::consts::PI,
            1e-13,
        )
        .value;
        assert!((m - g.hitting_probability()).abs() < 1e-9, "d={d}: {m}");
    }
}

#[test]
fn full_band_probabilities() {
    let g = geom(3, 1.0, 0.5);
    let p = band_probability(&JointQuery::place(g, Band::full()), &ctrl(), &inv()).unwrap();
    assert!((p.value - 1.0).abs() < 1e-14);
    let g = geom(3, 1.0, 2.0);
    let p = band_probability(&JointQuery::place(g, Band::full()), &ctrl(), &inv()).unwrap();
    assert!((p.value - 0.5).abs() < 1e-14);
    let p = band_probability(&JointQuery::place(g, band(0.2, 0.2)), &ctrl(), &inv()).unwrap();
    assert_eq!(p.value, 0.0);
}

#[test]
fn cap_mass_closed_form() {
    let s: f64 = 0.5;
    let g = geom(3, 1.0, s);
    let p = band_probability(&JointQuery::place(g, band(0.0, 1.0)), &ctrl(), &inv()).unwrap();
    let exact = (1.0 - s * s) / (2.0 * s) * (1.0 / (1.0 - s) - 1.0 / (1.0 + s * s).sqrt());
    assert!((p.value - exact).abs() < 1e-10, "{} vs {exact}", p.value);
}

#[test]
fn additive_in_band_and_time() {
    let g = geom(3, 1.0, 2.0);
    let c = ctrl();
    let i = inv();
    let q = |lo: f64, hi: f64, t1: f64, t2: f64| {
        band_probability(&JointQuery::new(g, t1, t2, band(lo, hi), None).unwrap(), &c, &i).unwrap().value
    };
    let whole = q(0.5, 1.0, 0.2, 1.0);
    let parts = q(0.5, 0.8, 0.2, 1.0) + q(0.8, 1.0, 0.2, 1.0);
    assert!((whole - parts).abs() < 1e-10);
    let parts = q(0.5, 1.0, 0.2, 0.6) + q(0.5, 1.0, 0.6, 1.0);
    assert!((whole - parts).abs() < 1e-10);
    assert!(whole > 0.0 && whole < 1.0);
}

#[test]
fn density_marginal_is_radial_density() {
    for (d, a) in [(2u32, 0.5), (3, 0.5), (3, 2.0), (5, 1.5)] {
        let g = geom(d, 1.0, a);
        for t in [0.15, 0.6, 2.5] {
            let m = quadrature::adaptive(
                |th: f64| {
                    let x = th.cos();
                    joint_density(&g, t, x, &ctrl(), &inv()).unwrap().value * band_weight(d, x) * th.sin()
                },
                0.0,
                std::f64::consts::PI,
                1e-11,
            )
            .value;
            let f = fpt_density(g.nu(), a, 1.0, t, &inv()).unwrap();
            assert!((m - f).abs() < 1e-8, "d={d} a={a} t={t}: {m} vs {f}");
        }
    }
}

#[test]
fn density_matches_band_differences() {
    let g = geom(3, 1.0, 0.5);
    let (t, x, h, k) = (0.4, 0.7, 1e-3, 1e-3);
    let psi = joint_density(&g, t, x, &ctrl(), &inv()).unwrap().value;
    let p = band_probability(&JointQuery::new(g, t - k, t + k, band(x - h, x + h), None).unwrap(), &ctrl(), &inv())
        .unwrap()
        .value;
    let fd = p / (2.0 * k) / (2.0 * h * band_weight(3, x));
    assert!(((fd - psi) / psi).abs() < 1e-4, "{fd} vs {psi}");
}

#[test]
fn density_nonnegative() {
    let g = geom(3, 1.0, 2.0);
    for t in [0.05, 0.3, 1.0, 5.0, 40.0] {
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            let v = joint_density(&g, t, x, &ctrl(), &inv()).unwrap().value;
            assert!(v >= -1e-8, "t={t} x={x}: {v}");
        }
    }
}

#[test]
fn full_band_tail_is_radial_tail() {
    let g = geom(3, 1.0, 2.0);
    let q = JointQuery::new(g, 5.0, f64::INFINITY, Band::full(), None).unwrap();
    let t = tail_probability(&q, &ctrl(), &inv()).unwrap();
    let f = fpt_tail(0.5, 2.0, 1.0, 5.0, &inv()).unwrap();
    assert!((t.value - f).abs() < 1e-12);
    assert!(t.correction.abs() < 1e-12);
}

#[test]
fn planar_tail_correction_bound() {
    let g = geom(2, 1.0, 2.0);
    let q = JointQuery::new(g, 10.0, f64::INFINITY, band(0.0, 1.0), None).unwrap();
    let t = tail_probability(&q, &ctrl(), &inv()).unwrap();
    assert!((t.correction_bound - 0.2 * std::f64::consts::E).abs() < 1e-12);
    assert!(t.correction.abs() <= t.correction_bound);
    let lead = 0.5 * fpt_tail(0.0, 2.0, 1.0, 10.0, &inv()).unwrap();
    assert!((t.leading - lead).abs() < 1e-12);
}

#[test]
fn tail_correction_within_bound_d3() {
    for band_ in [band(-1.0, 0.0), band(0.3, 1.0)] {
        for t in [2.0, 20.0] {
            let q = JointQuery::new(geom(3, 1.0, 2.0), t, f64::INFINITY, band_, None).unwrap();
            let d = tail_probability(&q, &ctrl(), &inv()).unwrap();
            assert!(d.correction.abs() <= d.correction_bound, "{d:?}");
        }
    }
}

#[test]
fn tail_asymptotic_examples() {
    let q = JointQuery::new(geom(3, 1.0, 2.0), 100.0, f64::INFINITY, band(0.0, 1.0), None).unwrap();
    assert!((tail_asymptotic(&q).unwrap() - 0.019947114020071634).abs() < 1e-9);
    let e = std::f64::consts::E;
    let q = JointQuery::new(geom(2, 1.0, e), e.powi(4), f64::INFINITY, band(-1.0, 0.0), None).unwrap();
    assert!((tail_asymptotic(&q).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn brownian_scaling() {
    for c in [0.5, 2.0] {
        let q = JointQuery::new(geom(3, 1.0, 2.0), 0.3, 2.0, band(-0.2, 0.6), None).unwrap();
        let g2 = geom(3, c, 2.0 * c);
        let q2 = JointQuery::new(g2, 0.3 * c * c, 2.0 * c * c, band(-0.2, 0.6), None).unwrap();
        let p = band_probability(&q, &ctrl(), &inv()).unwrap().value;
        let p2 = band_probability(&q2, &ctrl(), &inv()).unwrap().value;
        assert!((p - p2).abs() < 1e-6);
    }
}

#[test]
fn queries_reject_bad_input() {
    let g = geom(3, 1.0, 2.0);
    assert!(JointQuery::new(g, 2.0, 1.0, Band::full(), None).is_err());
    let q = JointQuery::new(g, 0.0, 1.0, Band::full(), Some(Drift::new(0.1, 0.0).unwrap())).unwrap();
    assert!(band_probability(&q, &ctrl(), &inv()).is_err());
    let inner = JointQuery::new(geom(3, 1.0, 0.5), 1.0, f64::INFINITY, Band::full(), None).unwrap();
    assert!(tail_probability(&inner, &ctrl(), &inv()).is_err());
    assert!(joint_laplace(&g, -1.0, 0.0, 0.0, &ctrl()).is_err());
    assert!(joint_density(&g, 1.0, 1.5, &ctrl(), &inv()).is_err());
    assert!(Drift::new(0.0, -1.0).is_err());
}

#[test]
fn drift_reduces_without_drift() {
    let g = geom(3, 1.0, 0.5);
    let zero = Drift::new(0.0, 0.0).unwrap();
    let a = drift_joint_laplace(&g, &zero, 1.3, 0.2, 0.4, 0.0, &ctrl()).unwrap().value;
    let b = joint_laplace(&g, 1.3, 0.2, 0.4, &ctrl()).unwrap().value;
    assert_eq!(a, b);
    let dd = drift_joint_density(&g, &zero, 0.4, 0.3, &ctrl(), &inv()).unwrap();
    let psi = joint_density(&g, 0.4, 0.3, &ctrl(), &inv()).unwrap().value;
    assert_eq!(dd.axial, psi);
    assert_eq!(dd.tilt, (0.0, 0.0));
    let q = JointQuery::new(g, 0.1, 0.9, band(0.0, 0.5), Some(zero)).unwrap();
    let a = drift_band_probability(&q, &ctrl(), &inv()).unwrap().value;
    let b = band_probability(&JointQuery { drift: None, ..q }, &ctrl(), &inv()).unwrap().value;
    assert!((a - b).abs() < 1e-14);
}

#[test]
fn drift_cancelling_exponent() {
    let g = geom(3, 1.0, 2.0);
    let v = Drift::new(0.4, 0.3).unwrap();
    // u = -v: the surface factor is constant
    let got = drift_joint_laplace(&g, &v, 0.8, -0.4, 0.3, std::f64::consts::PI, &ctrl()).unwrap().value;
    let want = (-2.0 * 0.4f64).exp() * fpt_laplace(0.5, 2.0, 1.0, 0.8 + v.alpha()).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn axial_drift_density() {
    let g = geom(3, 1.0, 2.0);
    let v = Drift::new(0.5, 0.0).unwrap();
    let (t, x) = (0.5, 0.6);
    let dd = drift_joint_density(&g, &v, t, x, &ctrl(), &inv()).unwrap();
    let psi = joint_density(&g, t, x, &ctrl(), &inv()).unwrap().value;
    let want = (-2.0 * 0.5 + 0.5 * x - 0.125 * t).exp() * psi;
    assert!((dd.averaged(3) - want).abs() < 1e-14 * want.max(1.0));
}

#[test]
fn drift_band_probability_matches_density_integral() {
    let g = geom(3, 1.0, 2.0);
    let v = Drift::new(0.5, 0.3).unwrap();
    let q = JointQuery::new(g, 0.3, 1.5, band(0.5, 1.0), Some(v)).unwrap();
    let p = drift_band_probability(&q, &ctrl(), &inv()).unwrap().value;
    let inner = |t: f64| {
        quadrature::adaptive(
            |x: f64| drift_joint_density(&g, &v, t, x, &ctrl(), &inv()).unwrap().averaged(3) * band_weight(3, x),
            0.5,
            1.0,
            1e-12,
        )
        .value
    };
    let q = quadrature::adaptive(inner, 0.3, 1.5, 1e-10).value;
    assert!((p - q).abs() < 1e-7, "{p} vs {q}");
}

#[test]
fn drift_total_mass_interior_is_one() {
    // from inside, the sphere is hit a.s. whatever the drift
    let g = geom(2, 1.0, 0.5);
    let q = JointQuery::new(g, 0.0, f64::INFINITY, Band::full(), Some(Drift::new(1.0, 0.0).unwrap())).unwrap();
    let p = drift_band_probability(&q, &ctrl(), &inv()).unwrap();
    assert!((p.value - 1.0).abs() < 1e-9, "{}", p.value);
}

#[test]
fn drift_tail_asymptotic_example() {
    let g = geom(3, 1.0, 2.0);
    let v = Drift::new(1.0, 0.0).unwrap();
    let q = JointQuery::new(g, 50.0, f64::INFINITY, Band::full(), Some(v)).unwrap();
    let tilt = sphere_exp_average(3, 1.0);
    let want = 2.0 * 0.19947114020071635 * (-2.0f64).exp() * tilt * 50f64.powf(-1.5) * (-25.0f64).exp();
    let got = drift_tail_asymptotic(&q).unwrap();
    assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
}

#[test]
fn drift_tail_approaches_asymptotic() {
    let g = geom(3, 1.0, 2.0);
    let v = Drift::new(0.6, 0.8).unwrap();
    let mut prev = f64::INFINITY;
    for t in [40.0, 400.0] {
        let q = JointQuery::new(g, t, f64::INFINITY, band(0.0, 1.0), Some(v)).unwrap();
        let scaled = drift_tail_scaled(&q, &ctrl(), &inv()).unwrap().value;
        let asym = drift_tail_asymptotic(&q).unwrap() * (v.alpha() * t).exp();
        let ratio = scaled / asym;
        assert!((0.7..=1.3).contains(&ratio), "t={t}: {ratio}");
        assert!((ratio - 1.0).abs() < (prev - 1.0).abs());
        prev = ratio;
    }
}
