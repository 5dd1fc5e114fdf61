use spherehit::fpt::{fpt_laplace, Geometry};
use spherehit::jointdist::{band_probability, Drift, JointQuery};
use spherehit::mcverify::{estimate, estimate_laplace_functional, simulate, Censor, Exponent, McConfig};
use spherehit::specfun::Band;
use spherehit::inversion::InversionControl;
use spherehit::SeriesControl;

fn cfg(n_paths: u64) -> McConfig {
    McConfig { n_paths, ..McConfig::default() }
}

#[test]
fn five_dimensional_hit_frequency() {
    // P(sigma < inf) = (r/a)^{d-2} = 1/8
    let g = Geometry::new(5, 1.0, 2.0).unwrap();
    let c = McConfig { time_horizon: 1e6, ..cfg(100_000) };
    let e = &estimate(&g, None, &[JointQuery::place(g, Band::full())], &c).unwrap()[0];
    assert!((e.estimate - 0.125).abs() < 3.0 * e.std_err, "{} +- {}", e.estimate, e.std_err);
    assert!(e.bias_bound < 0.1 * e.std_err);
}

#[test]
fn hit_times_pass_kolmogorov_smirnov_against_half_order_law() {
    // d = 3, a = 2, r = 1: P(sigma <= t) = erfc(1/sqrt(2t)) / 2. Paths are
    // stopped at T = 10, long before any could reach the escape radius, and
    // the hit times are compared with the law conditioned on sigma <= T.
    let g = Geometry::new(3, 1.0, 2.0).unwrap();
    let horizon = 10.0;
    let c = McConfig { time_horizon: horizon, ..cfg(270_000) };
    let samples = simulate(&g, None, &c).unwrap();
    assert!(samples.iter().all(|s| s.censored_by != Censor::Escape));
    let cdf = |t: f64| 0.5 * libm::erfc(1.0 / (2.0 * t).sqrt());
    let total = cdf(horizon);
    let mut times: Vec<f64> = samples.iter().filter(|s| s.hit).map(|s| s.time).collect();
    times.sort_by(f64::total_cmp);
    let n = times.len() as f64;
    assert!(n >= 1e5, "only {n} hits");
    let d = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = cdf(t) / total;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // asymptotic critical value at level 0.01
    assert!(d * n.sqrt() < 1.628, "KS statistic {d} with {n} hits");
}

fn angular_chi_square(g: &Geometry, drift: Option<&Drift>, n_paths: u64) -> f64 {
    const BINS: usize = 20;
    let samples = simulate(g, drift, &cfg(n_paths)).unwrap();
    let mut counts = [0usize; BINS];
    let mut hits = 0usize;
    for s in samples.iter().filter(|s| s.hit) {
        let phi = s.place_z.atan2(s.place_y);
        let k = ((phi + std::f64::consts::PI) / std::f64::consts::TAU * BINS as f64) as usize;
        counts[k.min(BINS - 1)] += 1;
        hits += 1;
    }
    let expected = hits as f64 / BINS as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

#[test]
fn orthogonal_angle_is_uniform() {
    // chi-square, 19 degrees of freedom, level 0.01
    const CRITICAL: f64 = 36.19;
    let g = Geometry::new(3, 1.0, 0.5).unwrap();
    let stat = angular_chi_square(&g, None, 100_000);
    assert!(stat < CRITICAL, "no drift: {stat}");
    let v = Drift::new(0.4, 0.0).unwrap();
    let stat = angular_chi_square(&g, Some(&v), 100_000);
    assert!(stat < CRITICAL, "axial drift: {stat}");
}

#[test]
fn laplace_functional_without_exponent_is_radial_transform() {
    let g = Geometry::new(3, 1.0, 0.5).unwrap();
    let e = estimate_laplace_functional(&g, None, 1.0, &Exponent::zero(), &cfg(50_000)).unwrap();
    let want = fpt_laplace(0.5, 0.5, 1.0, 1.0).unwrap();
    assert!((e.estimate - want).abs() < 3.0 * e.std_err, "{} +- {} vs {want}", e.estimate, e.std_err);
    let e = estimate_laplace_functional(&g, None, 1e4, &Exponent::zero(), &cfg(2_000)).unwrap();
    assert!(e.estimate < 1e-10);
}

#[test]
fn step_refinement_changes_estimate_below_noise() {
    let g = Geometry::new(3, 1.0, 2.0).unwrap();
    let q = JointQuery::new(g, 0.2, 1.0, Band::new(0.5, 1.0).unwrap(), None).unwrap();
    let coarse = McConfig { time_horizon: 1.0, ..cfg(100_000) };
    let fine = McConfig { base_step: 0.005, ..coarse };
    let a = estimate(&g, None, &[q], &coarse).unwrap()[0];
    let b = estimate(&g, None, &[q], &fine).unwrap()[0];
    assert!((a.estimate - b.estimate).abs() < 2.0 * a.std_err, "{} vs {} (se {})", a.estimate, b.estimate, a.std_err);
}

#[test]
fn exterior_tail_within_three_standard_errors() {
    // P(1 < sigma < inf) = (1 - erfc(1/sqrt 2)) / 2 for d = 3, a = 2, r = 1
    let g = Geometry::new(3, 1.0, 2.0).unwrap();
    let q = JointQuery::new(g, 1.0, f64::INFINITY, Band::full(), None).unwrap();
    let c = McConfig { escape_radius: 5000.0, time_horizon: 1e8, ..cfg(10_000) };
    let e = estimate(&g, None, &[q], &c).unwrap()[0];
    let want = 0.5 * (1.0 - libm::erfc(0.5f64.sqrt()));
    assert!((e.estimate - want).abs() < 3.0 * e.std_err, "{} +- {} vs {want}", e.estimate, e.std_err);
    let series = band_probability(&q, &SeriesControl::default(), &InversionControl::default()).unwrap().value;
    assert!((series - want).abs() < 1e-10);
}

#[test]
fn escape_bias_rule_rejects_short_escape_radius() {
    let g = Geometry::new(3, 1.0, 2.0).unwrap();
    let q = JointQuery::new(g, 1.0, f64::INFINITY, Band::full(), None).unwrap();
    assert!(estimate(&g, None, &[q], &cfg(10_000)).is_err());
}
