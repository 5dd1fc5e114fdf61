//! Cross-check suites: each compares the series against an independent
//! oracle (closed forms, bounds, quadrature, simulation) and reports a
//! single pass/fail verdict with its worst deviation.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpt::{
    fpt_cdf, fpt_density, fpt_laplace, fpt_tail, fpt_tail_bound, h_exp_tail_scaled_ln, kappa, l_const, Geometry,
};
use crate::inversion::InversionControl;
use crate::jointdist::{
    band_probability, drift_band_probability, drift_joint_laplace, hitting_place_density, joint_laplace,
    poisson_kernel, tail_probability, Drift, JointQuery,
};
use crate::mcverify::{laplace_bias_bound, query_bias_bounds, score_laplace, score_queries, simulate, Exponent, McConfig};
use crate::quadrature;
use crate::series::SeriesControl;
use crate::specfun::{band_measure, Band};

/// Names of the available suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    PoissonKernel,
    LaplaceCollapse,
    HalfOrder,
    RoundTrip,
    TailBound,
    TailAsymptotics,
    MonteCarlo,
    CameronMartin,
    DriftTail,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::PoissonKernel,
        Suite::LaplaceCollapse,
        Suite::HalfOrder,
        Suite::RoundTrip,
        Suite::TailBound,
        Suite::TailAsymptotics,
        Suite::MonteCarlo,
        Suite::CameronMartin,
        Suite::DriftTail,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::PoissonKernel => "poisson-kernel",
            Suite::LaplaceCollapse => "u-zero",
            Suite::HalfOrder => "half-order",
            Suite::RoundTrip => "round-trip",
            Suite::TailBound => "tail-bound",
            Suite::TailAsymptotics => "tail-asymptotics",
            Suite::MonteCarlo => "monte-carlo",
            Suite::CameronMartin => "cameron-martin",
            Suite::DriftTail => "drift-tail",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Config(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub passed: bool,
    /// Worst deviation in the units of the criterion.
    pub worst: f64,
    pub summary: String,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.summary,
            self.seconds
        )
    }
}

/// Parameters of the simulation suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub mc_paths: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mc_paths: 1_000_000, seed: 42 }
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Check> {
    let start = Instant::now();
    let (passed, worst, summary, details) = match suite {
        Suite::PoissonKernel => poisson_kernel_suite()?,
        Suite::LaplaceCollapse => laplace_collapse_suite()?,
        Suite::HalfOrder => half_order_suite()?,
        Suite::RoundTrip => round_trip_suite()?,
        Suite::TailBound => tail_bound_suite()?,
        Suite::TailAsymptotics => tail_asymptotics_suite()?,
        Suite::MonteCarlo => monte_carlo_suite(opts)?,
        Suite::CameronMartin => cameron_martin_suite()?,
        Suite::DriftTail => drift_tail_suite()?,
    };
    Ok(Check { suite, passed, worst, summary, details, seconds: start.elapsed().as_secs_f64() })
}

type Outcome = (bool, f64, String, Vec<String>);

fn ctrl() -> SeriesControl {
    SeriesControl::default()
}

fn inv() -> InversionControl {
    InversionControl::default()
}

fn band(lo: f64, hi: f64) -> Band {
    Band::new(lo, hi).expect("valid band literal")
}

const POISSON_TOL: f64 = 1e-8;

fn poisson_kernel_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let dims = [2u32, 3, 4, 5, 7];
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for _ in 0..100 {
        let d = dims[rng.random_range(0..dims.len())];
        let s = if rng.random::<bool>() { rng.random_range(0.0..0.95) } else { rng.random_range(1.05..5.0) };
        let s: f64 = if s == 0.0 { 1e-3 } else { s };
        let x = rng.random_range(-1.0..=1.0);
        let g = Geometry::new(d, 1.0, s)?;
        let series = hitting_place_density(&g, x, &ctrl())?.value;
        let kernel = poisson_kernel(&g, x);
        let dev = (series - kernel).abs();
        if dev > POISSON_TOL {
            details.push(format!("d={d} a/r={s:.6} x={x:.6}: series {series:.17e} kernel {kernel:.17e} dev {dev:.3e}"));
        }
        worst = worst.max(dev);
    }
    Ok((worst <= POISSON_TOL, worst, format!("100 draws, max |series - kernel| = {worst:.3e} (tol {POISSON_TOL:.0e})"), details))
}

fn laplace_collapse_suite() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for d in [2u32, 3, 4, 5, 7] {
        for s in [0.2, 0.6, 0.9, 1.5, 3.0] {
            let g = Geometry::new(d, 1.0, s)?;
            for lambda in [0.01, 0.1, 1.0, 10.0, 100.0] {
                let j = joint_laplace(&g, lambda, 0.0, 0.0, &ctrl())?.value;
                let f = fpt_laplace(g.nu(), s, 1.0, lambda)?;
                worst = worst.max((j - f).abs());
            }
        }
    }
    Ok((worst <= 1e-10, worst, format!("125 points, max |joint - radial| = {worst:.3e} (tol 1e-10)"), vec![]))
}

fn half_order_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inv = inv();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut details = Vec::new();
    for _ in 0..200 {
        let r: f64 = rng.random_range(0.5..2.0);
        let a = r * rng.random_range(1.1..5.0);
        let l = a - r;
        let t = l * l * 10f64.powf(rng.random_range(-1.5..2.5));
        let z = l / (2.0 * t).sqrt();
        let dens = r / a * l / (2.0 * std::f64::consts::PI * t.powi(3)).sqrt() * (-z * z).exp();
        if dens <= 1e-12 {
            continue;
        }
        used += 1;
        let cdf = r / a * libm::erfc(z);
        let tail = r / a * libm::erf(z);
        let got = [
            fpt_density(0.5, a, r, t, &inv)?,
            fpt_cdf(0.5, a, r, t, &inv)?,
            fpt_tail(0.5, a, r, t, &inv)?,
        ];
        for (g, e) in got.iter().zip([dens, cdf, tail]) {
            let rel = ((g - e) / e).abs();
            if rel > 1e-8 {
                details.push(format!("a={a:.4} r={r:.4} t={t:.4e}: {g:.17e} vs {e:.17e}"));
            }
            worst = worst.max(rel);
        }
    }
    Ok((worst <= 1e-8, worst, format!("{used} points (density > 1e-12), max relative error {worst:.3e} (tol 1e-8)"), details))
}

fn round_trip_suite() -> Result<Outcome> {
    let inv = inv();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for nu in [0.0, 0.5, 1.0, 1.5, 3.0] {
        for a in [0.5, 2.0] {
            let fp = crate::fpt::FirstPassage::new(nu, a, 1.0)?;
            for lambda in [0.25, 1.0, 4.0] {
                let exact = fp.laplace(lambda);
                let mut err = None;
                // panels with geometric growth; the weight e^{-lambda t} ends the range
                let mut acc = 0.0;
                let mut lo = 0.0;
                let mut hi = 0.05;
                while lo < 60.0 / lambda + 60.0 {
                    let piece = quadrature::adaptive(
                        |t: f64| {
                            if t <= 0.0 {
                                return 0.0;
                            }
                            match fp.density(t, &inv) {
                                Ok(v) => (-lambda * t).exp() * v.value,
                                Err(e) => {
                                    err.get_or_insert(e);
                                    0.0
                                }
                            }
                        },
                        lo,
                        hi,
                        1e-12,
                    );
                    acc += piece.value;
                    lo = hi;
                    hi *= 2.0;
                }
                if let Some(e) = err {
                    return Err(e);
                }
                let rel = ((acc - exact) / exact).abs();
                if rel > 1e-6 {
                    details.push(format!("nu={nu} a={a} lambda={lambda}: {acc:.12e} vs {exact:.12e}"));
                }
                worst = worst.max(rel);
            }
        }
    }
    Ok((worst <= 1e-6, worst, format!("30 transforms, max relative error {worst:.3e} (tol 1e-6)"), details))
}

fn tail_bound_suite() -> Result<Outcome> {
    let inv = inv();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let nus = [0.5, 1.0, 1.5, 2.0, 3.0];
    let ratios = [1.1, 1.5, 2.0, 4.0];
    let radii = [0.5, 1.0];
    let times = [0.1, 1.0, 10.0, 100.0, 1000.0];
    for nu in nus {
        for q in ratios {
            for r in radii {
                for t in times {
                    let a = q * r;
                    let tail = fpt_tail(nu, a, r, t, &inv)?;
                    let b = fpt_tail_bound(nu, r, t)?;
                    worst = worst.max(tail / b);
                    if tail > b {
                        violations += 1;
                        details.push(format!("nu={nu} a={a} r={r} t={t}: tail {tail:.6e} > bound {b:.6e}"));
                    }
                }
            }
        }
    }
    let n = nus.len() * ratios.len() * radii.len() * times.len();
    Ok((violations == 0, worst, format!("{n} points, {violations} violations, max tail/bound {worst:.4}"), details))
}

fn tail_asymptotics_suite() -> Result<Outcome> {
    let inv = inv();
    let mut ok = true;
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for (d, a, r) in [(3u32, 2.0, 1.0), (5, 3.0, 1.0)] {
        let g = Geometry::new(d, r, a)?;
        let k = kappa(g.nu(), a, r)?;
        for b in [Band::full(), band(0.0, 1.0)] {
            let bm = band_measure(d, &b);
            let mut ratios = Vec::new();
            for m in [1e2, 1e3, 1e4] {
                let t = m * (a - r) * (a - r);
                let q = JointQuery::new(g, t, f64::INFINITY, b, None)?;
                let tail = tail_probability(&q, &ctrl(), &inv)?.value;
                ratios.push(t.powf(g.nu()) * tail / (k * bm));
            }
            let in_range = (0.85..=1.15).contains(&ratios[0]);
            let monotone = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
            ok &= in_range && monotone;
            worst = worst.max((ratios[0] - 1.0).abs());
            details.push(format!(
                "d={d} a={a} r={r} band=[{}, {}]: ratios {:.6} {:.6} {:.6}{}",
                b.lo(),
                b.hi(),
                ratios[0],
                ratios[1],
                ratios[2],
                if in_range && monotone { "" } else { "  <-- fails" }
            ));
        }
    }
    let (a, r) = (2.0, 1.0);
    let g = Geometry::new(2, r, a)?;
    for b in [Band::full(), band(0.0, 1.0)] {
        let bm = band_measure(2, &b);
        let mut ratios = Vec::new();
        for t in [1e6, 1e9, 1e12] {
            let q = JointQuery::new(g, t, f64::INFINITY, b, None)?;
            let tail = tail_probability(&q, &ctrl(), &inv)?.value;
            ratios.push(tail / (2.0 * (a / r).ln() / t.ln() * bm));
        }
        let in_range = (0.5..=1.5).contains(&ratios[0]);
        let improving = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        ok &= in_range && improving;
        details.push(format!(
            "d=2 a={a} r={r} band=[{}, {}]: ratios {:.6} {:.6} {:.6}{}",
            b.lo(),
            b.hi(),
            ratios[0],
            ratios[1],
            ratios[2],
            if in_range && improving { "" } else { "  <-- fails" }
        ));
    }
    Ok((ok, worst, format!("6 tail-ratio sequences, worst |ratio - 1| at t = 100 (a-r)^2 (d >= 3): {worst:.4}"), details))
}

/// One simulated quantity and its series counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McComparison {
    pub label: String,
    pub series: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub bias_bound: f64,
    pub n_censored: u64,
}

impl McComparison {
    pub fn z_score(&self) -> f64 {
        (self.series - self.estimate) / self.std_err
    }
}

enum Target {
    Window(JointQuery),
    Laplace { lambda: f64, u: Exponent },
}

struct McCase {
    label: &'static str,
    d: u32,
    a: f64,
    drift: Option<Drift>,
    escape_radius: f64,
    time_horizon: f64,
    targets: Vec<(&'static str, Target)>,
}

fn window(g: Geometry, t1: f64, t2: f64, b: Band, drift: Option<Drift>) -> Target {
    Target::Window(JointQuery { geometry: g, t1, t2, band: b, drift })
}

fn canonical_cases() -> Result<Vec<McCase>> {
    let g = |d, a| Geometry::new(d, 1.0, a);
    let inf = f64::INFINITY;
    let v_e = Some(Drift::new(0.3, 0.1)?);
    let v_f = Some(Drift::new(1.0, 0.0)?);
    let v_g = Some(Drift::new(0.5, 0.0)?);
    Ok(vec![
        McCase {
            label: "d=3 a=0.5",
            d: 3,
            a: 0.5,
            drift: None,
            escape_radius: 50.0,
            time_horizon: 1e9,
            targets: vec![
                ("cap [0,1], t in [0,inf)", window(g(3, 0.5)?, 0.0, inf, band(0.0, 1.0), None)),
                ("E[e^{-s} e^{<u,B>}], u=(0.3,0.2)", Target::Laplace {
                    lambda: 1.0,
                    u: Exponent { u_axis: 0.3, u_perp: 0.2, gamma: 0.0 },
                }),
            ],
        },
        McCase {
            label: "d=3 a=2",
            d: 3,
            a: 2.0,
            drift: None,
            escape_radius: 50.0,
            time_horizon: 1.0,
            targets: vec![("band [0.5,1], t in (0.2,1]", window(g(3, 2.0)?, 0.2, 1.0, band(0.5, 1.0), None))],
        },
        McCase {
            label: "d=3 a=2 (far escape)",
            d: 3,
            a: 2.0,
            drift: None,
            escape_radius: 3e4,
            time_horizon: 1e12,
            targets: vec![("band [-1,0], t in (5,inf)", window(g(3, 2.0)?, 5.0, inf, band(-1.0, 0.0), None))],
        },
        McCase {
            label: "d=2 a=2",
            d: 2,
            a: 2.0,
            drift: None,
            escape_radius: inf,
            time_horizon: 3.0,
            targets: vec![("band [0,1], t in (0.5,3]", window(g(2, 2.0)?, 0.5, 3.0, band(0.0, 1.0), None))],
        },
        McCase {
            label: "d=2 a=0.5",
            d: 2,
            a: 0.5,
            drift: None,
            escape_radius: inf,
            time_horizon: 1e9,
            targets: vec![("E[e^{-s} e^{<u,B>}], u=(0.3,0.4)", Target::Laplace {
                lambda: 1.0,
                u: Exponent { u_axis: 0.3, u_perp: 0.4, gamma: 0.0 },
            })],
        },
        McCase {
            label: "d=5 a=2",
            d: 5,
            a: 2.0,
            drift: None,
            escape_radius: 40.0,
            time_horizon: 1e6,
            targets: vec![
                ("whole sphere, t in [0,inf)", window(g(5, 2.0)?, 0.0, inf, Band::full(), None)),
                ("band [0.5,1], t in (0.5,3]", window(g(5, 2.0)?, 0.5, 3.0, band(0.5, 1.0), None)),
            ],
        },
        McCase {
            label: "d=3 a=0.5 v=(0.3,0.1)",
            d: 3,
            a: 0.5,
            drift: v_e,
            escape_radius: 50.0,
            time_horizon: 1e9,
            targets: vec![
                ("E[e^{-s}]", Target::Laplace { lambda: 1.0, u: Exponent::zero() }),
                ("cap [0,1], t in [0,inf)", window(g(3, 0.5)?, 0.0, inf, band(0.0, 1.0), v_e)),
            ],
        },
        McCase {
            label: "d=2 a=0.5 v=(1,0)",
            d: 2,
            a: 0.5,
            drift: v_f,
            escape_radius: inf,
            time_horizon: 1e9,
            targets: vec![("half circle [0,1], t in [0,inf)", window(g(2, 0.5)?, 0.0, inf, band(0.0, 1.0), v_f))],
        },
        McCase {
            label: "d=3 a=2 v=(0.5,0)",
            d: 3,
            a: 2.0,
            drift: v_g,
            escape_radius: 50.0,
            time_horizon: 0.75,
            targets: vec![("band [0.5,1], t in (0.25,0.75]", window(g(3, 2.0)?, 0.25, 0.75, band(0.5, 1.0), v_g))],
        },
    ])
}

fn series_value(t: &Target, g: &Geometry, drift: Option<&Drift>) -> Result<f64> {
    let (c, i) = (ctrl(), inv());
    Ok(match (t, drift) {
        (Target::Window(q), None) => band_probability(q, &c, &i)?.value,
        (Target::Window(q), Some(_)) => drift_band_probability(q, &c, &i)?.value,
        (Target::Laplace { lambda, u }, None) => joint_laplace(g, *lambda, u.u_axis, u.u_perp, &c)?.value,
        (Target::Laplace { lambda, u }, Some(v)) => {
            drift_joint_laplace(g, v, *lambda, u.u_axis, u.u_perp, u.gamma, &c)?.value
        }
    })
}

/// Runs the twelve canonical simulation comparisons.
pub fn monte_carlo_comparisons(opts: &VerifyOptions) -> Result<Vec<McComparison>> {
    let mut out = Vec::new();
    for case in canonical_cases()? {
        let g = Geometry::new(case.d, 1.0, case.a)?;
        let cfg = McConfig {
            n_paths: opts.mc_paths,
            seed: opts.seed,
            escape_radius: case.escape_radius,
            time_horizon: case.time_horizon,
            ..McConfig::default()
        };
        let drift = case.drift.as_ref();
        let mut bias = Vec::new();
        for (_, t) in &case.targets {
            bias.push(match t {
                Target::Window(q) => query_bias_bounds(&g, drift, std::slice::from_ref(q), &cfg)?[0],
                Target::Laplace { lambda, u } => laplace_bias_bound(&g, drift, *lambda, u, &cfg)?,
            });
        }
        let samples = simulate(&g, drift, &cfg)?;
        for ((name, t), b) in case.targets.iter().zip(bias) {
            let est = match t {
                Target::Window(q) => score_queries(&samples, std::slice::from_ref(q), &[b])[0],
                Target::Laplace { lambda, u } => score_laplace(&samples, &g, *lambda, u, b),
            };
            out.push(McComparison {
                label: format!("{}: {name}", case.label),
                series: series_value(t, &g, drift)?,
                estimate: est.estimate,
                std_err: est.std_err,
                bias_bound: est.bias_bound,
                n_censored: est.n_censored,
            });
        }
    }
    Ok(out)
}

fn monte_carlo_suite(opts: &VerifyOptions) -> Result<Outcome> {
    let rows = monte_carlo_comparisons(opts)?;
    let within = rows.iter().filter(|c| c.z_score().abs() <= 3.0).count();
    let worst = rows.iter().map(|c| c.z_score().abs()).fold(0.0, f64::max);
    let details = rows
        .iter()
        .map(|c| {
            format!(
                "{}: series {:.8} mc {:.8} +- {:.2e} (z = {:+.2}, bias <= {:.1e}, censored {})",
                c.label,
                c.series,
                c.estimate,
                c.std_err,
                c.z_score(),
                c.bias_bound,
                c.n_censored
            )
        })
        .collect();
    let need = rows.len() - 1;
    Ok((
        within >= need,
        worst,
        format!("{within}/{} within 3 standard errors at {} paths (need {need}), max |z| = {worst:.2}", rows.len(), opts.mc_paths),
        details,
    ))
}

fn cameron_martin_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(2..=6u32);
        let a = if rng.random::<bool>() { rng.random_range(0.2..0.9) } else { rng.random_range(1.2..3.0) };
        let g = Geometry::new(d, 1.0, a)?;
        let v = Drift::new(rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0))?;
        let lambda = rng.random_range(0.1..3.0);
        let (u1, up) = (rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0));
        let gamma = if d == 2 { 0.0 } else { rng.random_range(0.0..std::f64::consts::PI) };
        let lhs = drift_joint_laplace(&g, &v, lambda, u1, up, gamma, &ctrl())?.value;
        // orthogonal parts as plane vectors: u' at angle gamma to v'
        let (px, py) = (up * gamma.cos() + v.v_perp, up * gamma.sin());
        let speed_sq = v.v1 * v.v1 + v.v_perp * v.v_perp;
        let rhs = (-a * v.v1).exp() * joint_laplace(&g, lambda + 0.5 * speed_sq, u1 + v.v1, px.hypot(py), &ctrl())?.value;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((worst <= 1e-10, worst, format!("50 draws, max |drift - tilted| = {worst:.3e} (tol 1e-10)"), vec![]))
}

fn drift_tail_suite() -> Result<Outcome> {
    let inv = inv();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (d, a, r, speed) in [(3u32, 2.0, 1.0, 1.0), (4, 2.0, 1.0, 0.5)] {
        let nu = crate::specfun::order_of_dimension(d);
        let lead = 2.0 * l_const(nu, a, r)? / (speed * speed);
        let t0 = 40.0 / (speed * speed);
        let mut ratios = Vec::new();
        for m in [1.0, 10f64.sqrt(), 10.0] {
            let t = m * t0;
            // t^{nu+1} e^{speed^2 t/2} H(t)
            let scaled = h_exp_tail_scaled_ln(nu, a, r, speed, t, &inv)?.exp();
            ratios.push(t.powf(nu + 1.0) * scaled / lead);
        }
        let in_range = (0.8..=1.2).contains(&ratios[0]);
        let trend = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        ok &= in_range && trend;
        worst = worst.max((ratios[0] - 1.0).abs());
        details.push(format!(
            "d={d} a={a} r={r} |v|={speed}: ratios {:.6} {:.6} {:.6}{}",
            ratios[0],
            ratios[1],
            ratios[2],
            if in_range && trend { "" } else { "  <-- fails" }
        ));
    }
    Ok((ok, worst, format!("2 ratio sequences, worst |ratio - 1| at t = 40/|v|^2: {worst:.4}"), details))
}
