//! Acceptance run: every criterion at its stated tolerance and time limit,
//! one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::process::ExitCode;

use spherehit::verify::{run, Suite, VerifyOptions};

struct Criterion {
    number: u32,
    suite: Suite,
    limit_seconds: f64,
    what: &'static str,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { number: 1, suite: Suite::PoissonKernel, limit_seconds: 10.0, what: "place density series vs Poisson kernel, 100 draws, <= 1e-8" },
    Criterion { number: 2, suite: Suite::LaplaceCollapse, limit_seconds: 5.0, what: "u = 0 joint transform vs radial transform, 5x5x5 grid, <= 1e-10" },
    Criterion { number: 3, suite: Suite::HalfOrder, limit_seconds: 5.0, what: "nu = 1/2 density/cdf/tail vs closed forms, 200 points, <= 1e-8 relative" },
    Criterion { number: 4, suite: Suite::RoundTrip, limit_seconds: 30.0, what: "transform of inverted densities vs Bessel ratios, <= 1e-6 relative" },
    Criterion { number: 5, suite: Suite::TailBound, limit_seconds: 30.0, what: "exterior tail below r^{2nu}/(2^nu Gamma(nu+1) t^nu), 200 points, no violations" },
    Criterion { number: 6, suite: Suite::TailAsymptotics, limit_seconds: 120.0, what: "tail ratio in [0.85, 1.15] and monotone (d >= 3), in [0.5, 1.5] and improving (d = 2)" },
    Criterion { number: 7, suite: Suite::MonteCarlo, limit_seconds: 600.0, what: "12 canonical queries at 1e6 paths, seed 42, >= 11 within 3 standard errors" },
    Criterion { number: 8, suite: Suite::CameronMartin, limit_seconds: 5.0, what: "drifted transform vs tilted transform, 50 draws, <= 1e-10" },
    Criterion { number: 9, suite: Suite::DriftTail, limit_seconds: 60.0, what: "drifted tail ratio in [0.8, 1.2] at t = 40/|v|^2 and trending to 1" },
];

fn main() -> ExitCode {
    let opts = VerifyOptions { mc_paths: 1_000_000, seed: 42 };
    let mut failed = 0;
    for c in &CRITERIA {
        let (ok, line) = match run(c.suite, &opts) {
            Ok(check) => {
                let in_time = check.seconds < c.limit_seconds;
                let note = if in_time { String::new() } else { format!(" [over the {} s limit]", c.limit_seconds) };
                (check.passed && in_time, format!("{} ({:.1} s){note}", check.summary, check.seconds))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {} [{}] {}: {} -- {}", c.number, if ok { "PASS" } else { "FAIL" }, c.suite, c.what, line);
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
