use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use spherehit::fpt::Geometry;
use spherehit::inversion::InversionControl;
use spherehit::jointdist::{joint_density, poisson_kernel};
use spherehit::SeriesControl;

fn spherehit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spherehit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn density_grid_matches_library() {
    let o = spherehit(&["density", "--d", "3", "--a", "2", "--r", "1", "--t", "0.1:5:50", "--x", "-1:1:41"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["d", "a", "r", "t", "x", "value", "error_bound_or_stderr", "terms", "status"]);
    assert_eq!(rows.len(), 50 * 41);
    let g = Geometry::new(3, 1.0, 2.0).unwrap();
    for row in rows.iter().step_by(97) {
        let t: f64 = row[3].parse().unwrap();
        let x: f64 = row[4].parse().unwrap();
        let want = joint_density(&g, t, x, &SeriesControl::default(), &InversionControl::default()).unwrap();
        assert_eq!(row[5].parse::<f64>().unwrap().to_bits(), want.value.to_bits(), "t={t} x={x}");
        assert_eq!(row[6].parse::<f64>().unwrap(), want.residual_bound);
        assert_eq!(row[8], "ok");
    }
}

#[test]
fn json_and_csv_agree_bit_for_bit() {
    let common = ["marginal", "--d", "4", "--a", "0.6", "--x", "-1:1:9"];
    let csv = spherehit(&common);
    let json = spherehit(&[&common[..], &["--format", "json"]].concat());
    assert_eq!(csv.status.code(), Some(0));
    assert_eq!(json.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&csv));
    let records: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    let g = Geometry::new(4, 1.0, 0.6).unwrap();
    for (rec, row) in records.iter().zip(&rows) {
        let v = rec["value"].as_f64().unwrap();
        assert_eq!(v.to_bits(), row[4].parse::<f64>().unwrap().to_bits());
        let x = rec["inputs"]["x"].as_f64().unwrap();
        let kernel = rec["convergence_metadata"]["poisson_kernel"].as_f64().unwrap();
        assert_eq!(kernel.to_bits(), poisson_kernel(&g, x).to_bits());
        assert!((v - kernel).abs() <= 1e-8);
        for key in ["inputs", "value", "error_bound_or_stderr", "convergence_metadata"] {
            assert!(rec.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn verify_poisson_kernel_passes() {
    let o = spherehit(&["verify", "--suite", "poisson-kernel"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("[PASS] poisson-kernel"), "{out}");
    let dev: f64 = out.split("= ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(dev <= 1e-8);
}

#[test]
fn monte_carlo_reports_series_and_censoring() {
    let o = spherehit(&[
        "mc", "--d", "3", "--a", "2", "--r", "1", "--paths", "2e4", "--seed", "42", "--band", "0.5,1", "--t1", "0.2",
        "--t2", "1.0", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec = &serde_json::from_str::<Value>(&stdout(&o)).unwrap()[0];
    let meta = &rec["convergence_metadata"];
    let (est, se) = (rec["value"].as_f64().unwrap(), rec["error_bound_or_stderr"].as_f64().unwrap());
    let series = meta["series"].as_f64().unwrap();
    assert!(se > 0.0 && (est - series).abs() < 4.0 * se, "{est} +- {se} vs {series}");
    assert!(meta["n_censored"].as_u64().unwrap() > 0);
    assert_eq!(rec["inputs"]["paths"], 20000);
    assert_eq!(rec["inputs"]["horizon"].as_f64(), Some(1.0));
}

#[test]
fn config_file_with_flag_override() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# tail study\ncommand = tail\nd = 3\na = 2\nt = log:1e2:1e4:3\nband = 0,1\nformat = json").unwrap();
    let path = f.path().to_str().unwrap();
    let from_file = spherehit(&["--config", path]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let recs: Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(recs.as_array().unwrap().len(), 3);
    assert_eq!(recs[0]["inputs"]["band_lo"].as_f64(), Some(0.0));

    let overridden = spherehit(&["tail", "--config", path, "--a", "3", "--t", "50"]);
    assert_eq!(overridden.status.code(), Some(0), "{}", stderr(&overridden));
    let recs: Value = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(recs.as_array().unwrap().len(), 1);
    assert_eq!(recs[0]["inputs"]["a"].as_f64(), Some(3.0));
    assert_eq!(recs[0]["inputs"]["t"].as_f64(), Some(50.0));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("laplace.csv");
    let o = spherehit(&["laplace", "--d", "3", "--a", "0.5", "--lambda", "0.25,1,4", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let (_, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 3);
    // u = 0 reduces to the radial transform sqrt(2 l) a / sinh(sqrt(2 l) a) * sinh(sqrt(2 l)) / sqrt(2 l)
    for row in rows {
        let l: f64 = row[3].parse().unwrap();
        let k = (2.0 * l).sqrt();
        let want = (0.5 * k).sinh() / (0.5 * k.sinh());
        assert!((row[6].parse::<f64>().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["density", "--d", "3", "--a", "2", "--t", "1:0:3", "--x", "0"],
        &["density", "--d", "3", "--a", "2", "--t", "1", "--x", "2"],
        &["band", "--d", "3", "--a", "0.5", "--band", "1,0"],
        &["band", "--d", "1", "--a", "0.5"],
        &["tail", "--d", "3", "--a", "0.5", "--t", "10"],
        &["laplace", "--d", "3", "--a", "2"],
        &["laplace", "--d", "3", "--a", "2", "--lambda", "1", "--bogus", "1"],
        &["mc", "--d", "3", "--a", "2", "--paths", "0"],
        &["verify", "--suite", "nonsense"],
        &["--config", "/nonexistent/spherehit.cfg"],
        &[],
    ];
    for args in cases {
        let o = spherehit(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn numerical_failure_exits_1_and_names_operation() {
    let o = spherehit(&["laplace", "--d", "3", "--a", "0.99", "--lambda", "1", "--u-axis", "3", "--n-max", "2", "--abs-tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("joint_laplace"), "{}", stderr(&o));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].last().unwrap().contains("not converged"));
}

#[test]
fn drift_commands_run() {
    let base = ["--d", "3", "--a", "2", "--v1", "-0.5", "--v-perp", "0.2"];
    for (cmd, extra) in [
        ("drift-laplace", vec!["--lambda", "1", "--u-axis", "0.1", "--gamma", "0.3"]),
        ("drift-density", vec!["--t", "0.5,1", "--x", "-1:1:3"]),
        ("drift-band", vec!["--t2", "1,inf", "--band", "0,1"]),
        ("drift-tail", vec!["--t", "10,100"]),
        ("drift-asymp", vec!["--t", "10,100"]),
    ] {
        let o = spherehit(&[&[cmd][..], &base, &extra].concat());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        assert!(!stdout(&o).lines().skip(1).any(|l| !l.ends_with(",ok")), "{cmd}");
    }
}
