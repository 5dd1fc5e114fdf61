use std::fs::File;
use std::io::{self, BufWriter, Write};

use spherehit::fpt::Geometry;
use spherehit::inversion::InversionControl;
use spherehit::jointdist::{
    band_probability, drift_band_probability, drift_joint_density, drift_joint_laplace, drift_tail_asymptotic,
    drift_tail_scaled, hitting_place_density, joint_density_row, joint_laplace, poisson_kernel, tail_asymptotic,
    tail_probability, Drift, JointQuery,
};
use spherehit::mcverify::{estimate, estimate_laplace_functional, Exponent, McConfig};
use spherehit::specfun::{sphere_exp_average, Band};
use spherehit::verify::{self, Suite, VerifyOptions};
use spherehit::SeriesValue;

use crate::args::*;
use crate::output::{write_csv, write_json, Field, Fields, Record};

#[derive(Debug)]
pub enum Failure {
    /// Malformed request: exit status 2.
    Usage(String),
    /// A computation did not converge or a check failed: exit status 1.
    Numeric(String),
}

impl Failure {
    pub fn status(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

fn usage(e: spherehit::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn is_usage(e: &spherehit::Error) -> bool {
    matches!(e, spherehit::Error::Domain { .. } | spherehit::Error::Config(_))
}

/// Records of one command plus the operations that failed numerically.
#[derive(Default)]
struct Table {
    records: Vec<Record>,
    failures: Vec<String>,
}

type Point = (Field, Field, Vec<Field>);

impl Table {
    /// Evaluates one grid point; numerical failures become a record with
    /// empty outputs, domain errors abort the command.
    fn eval(
        &mut self,
        inputs: Fields,
        meta_keys: &[&'static str],
        f: impl FnOnce() -> spherehit::Result<Point>,
    ) -> Result<(), Failure> {
        let (value, error, meta_values, status) = match f() {
            Ok((v, e, m)) => {
                debug_assert_eq!(m.len(), meta_keys.len());
                (v, e, m, "ok".to_string())
            }
            Err(e) if is_usage(&e) => return Err(usage(e)),
            Err(e) => {
                self.failures.push(e.to_string());
                (Field::Null, Field::Null, vec![Field::Null; meta_keys.len()], e.to_string())
            }
        };
        let mut meta: Fields = meta_keys.iter().copied().zip(meta_values).collect();
        meta.push(("status", status.into()));
        self.records.push(Record { inputs, value, error, meta });
        Ok(())
    }
}

fn series_point(s: SeriesValue) -> Point {
    (s.value.into(), s.residual_bound.into(), vec![s.terms.into()])
}

fn geometry(g: &GeomArgs) -> Result<Geometry, Failure> {
    Geometry::new(g.d, g.r, g.a).map_err(usage)
}

fn drift(v: &DriftArgs) -> Result<Drift, Failure> {
    Drift::new(v.v1, v.v_perp).map_err(usage)
}

fn band_of(b: &BandArg) -> Result<Band, Failure> {
    Band::new(b.band.0, b.band.1).map_err(usage)
}

fn geom_inputs(g: &GeomArgs) -> Fields {
    vec![("d", g.d.into()), ("a", g.a.into()), ("r", g.r.into())]
}

fn drift_inputs(v: &DriftArgs) -> Fields {
    vec![("v1", v.v1.into()), ("v_perp", v.v_perp.into())]
}

fn band_inputs(b: &Band) -> Fields {
    vec![("band_lo", b.lo().into()), ("band_hi", b.hi().into())]
}

fn check_controls(series: &SeriesArgs, inv: Option<&InvArgs>) -> Result<(), Failure> {
    series.control().validate().map_err(usage)?;
    if let Some(i) = inv {
        i.control().validate().map_err(usage)?;
    }
    Ok(())
}

fn emit(out: &OutArgs, table: &Table) -> Result<(), Failure> {
    write_table(out.format, out.output.as_deref(), &table.records)?;
    match table.failures.first() {
        None => Ok(()),
        Some(first) => Err(Failure::Numeric(format!("{} of {} points failed; first: {first}", table.failures.len(), table.records.len()))),
    }
}

fn write_table(format: Format, path: Option<&std::path::Path>, records: &[Record]) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let res = match format {
        Format::Csv => write_csv(sink, records),
        Format::Json => write_json(sink, records),
    };
    res.map_err(|e| Failure::Numeric(format!("writing output: {e}")))
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Laplace(a) => laplace(a),
        Command::Density(a) => density(a),
        Command::Marginal(a) => marginal(a),
        Command::Band(a) => band(a),
        Command::Tail(a) => tail(a),
        Command::Asymp(a) => asymp(a),
        Command::DriftLaplace(a) => drift_laplace(a),
        Command::DriftDensity(a) => drift_density(a),
        Command::DriftBand(a) => drift_band(a),
        Command::DriftTail(a) => drift_tail(a),
        Command::DriftAsymp(a) => drift_asymp(a),
        Command::Mc(a) => mc(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn laplace(a: LaplaceArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    check_controls(&a.series, None)?;
    let ctrl = a.series.control();
    let mut table = Table::default();
    for &lambda in &a.lambda.0 {
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend([("lambda", lambda.into()), ("u_axis", a.u.u_axis.into()), ("u_perp", a.u.u_perp.into())]);
        table.eval(inputs, &["terms"], || joint_laplace(&g, lambda, a.u.u_axis, a.u.u_perp, &ctrl).map(series_point))?;
    }
    emit(&a.out, &table)
}

fn density(a: DensityArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t in &a.t.0 {
        let row = joint_density_row(&g, t, &a.x.0, &ctrl, &inv);
        for (i, &x) in a.x.0.iter().enumerate() {
            let mut inputs = geom_inputs(&a.geom);
            inputs.extend([("t", t.into()), ("x", x.into())]);
            table.eval(inputs, &["terms"], || row.clone().map(|r| series_point(r[i])))?;
        }
    }
    emit(&a.out, &table)
}

fn marginal(a: MarginalArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    check_controls(&a.series, None)?;
    let ctrl = a.series.control();
    let mut table = Table::default();
    for &x in &a.x.0 {
        let mut inputs = geom_inputs(&a.geom);
        inputs.push(("x", x.into()));
        table.eval(inputs, &["terms", "poisson_kernel"], || {
            let s = hitting_place_density(&g, x, &ctrl)?;
            Ok((s.value.into(), s.residual_bound.into(), vec![s.terms.into(), poisson_kernel(&g, x).into()]))
        })?;
    }
    emit(&a.out, &table)
}

fn band(a: BandArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t2 in &a.t2.0 {
        let q = JointQuery::new(g, a.t1, t2, b, None).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(band_inputs(&b));
        inputs.extend([("t1", a.t1.into()), ("t2", t2.into())]);
        table.eval(inputs, &["terms"], || band_probability(&q, &ctrl, &inv).map(series_point))?;
    }
    emit(&a.out, &table)
}

fn tail(a: TailArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t in &a.t.0 {
        let q = JointQuery::new(g, t, f64::INFINITY, b, None).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(band_inputs(&b));
        inputs.push(("t", t.into()));
        table.eval(inputs, &["terms", "leading", "correction", "correction_bound"], || {
            let td = tail_probability(&q, &ctrl, &inv)?;
            Ok((
                td.value.into(),
                td.series.residual_bound.into(),
                vec![td.series.terms.into(), td.leading.into(), td.correction.into(), td.correction_bound.into()],
            ))
        })?;
    }
    emit(&a.out, &table)
}

fn asymp(a: AsympArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    let keys: &[&'static str] = if a.compare { &["series_tail", "ratio"] } else { &[] };
    for &t in &a.t.0 {
        let q = JointQuery::new(g, t, f64::INFINITY, b, None).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(band_inputs(&b));
        inputs.push(("t", t.into()));
        table.eval(inputs, keys, || {
            let lead = tail_asymptotic(&q)?;
            let meta = if a.compare {
                let tail = tail_probability(&q, &ctrl, &inv)?.value;
                vec![tail.into(), (tail / lead).into()]
            } else {
                vec![]
            };
            Ok((lead.into(), Field::Null, meta))
        })?;
    }
    emit(&a.out, &table)
}

fn drift_laplace(a: DriftLaplaceArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = drift(&a.drift)?;
    check_controls(&a.series, None)?;
    let ctrl = a.series.control();
    let mut table = Table::default();
    for &lambda in &a.lambda.0 {
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(drift_inputs(&a.drift));
        inputs.extend([
            ("lambda", lambda.into()),
            ("u_axis", a.u.u_axis.into()),
            ("u_perp", a.u.u_perp.into()),
            ("gamma", a.gamma.into()),
        ]);
        table.eval(inputs, &["terms"], || {
            drift_joint_laplace(&g, &v, lambda, a.u.u_axis, a.u.u_perp, a.gamma, &ctrl).map(series_point)
        })?;
    }
    emit(&a.out, &table)
}

fn drift_density(a: DriftDensityArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = drift(&a.drift)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t in &a.t.0 {
        for &x in &a.x.0 {
            let mut inputs = geom_inputs(&a.geom);
            inputs.extend(drift_inputs(&a.drift));
            inputs.extend([("t", t.into()), ("x", x.into())]);
            table.eval(inputs, &["terms", "axial", "tilt_c1", "tilt_c_perp"], || {
                let dd = drift_joint_density(&g, &v, t, x, &ctrl, &inv)?;
                let (c1, cp) = dd.tilt;
                // the residual of the driftless series carries the same factors
                let factor = (-g.a() * v.v1 - v.alpha() * t + c1).exp() * sphere_exp_average(g.d() - 1, cp);
                Ok((
                    dd.averaged(g.d()).into(),
                    (factor * dd.series.residual_bound).into(),
                    vec![dd.series.terms.into(), dd.axial.into(), c1.into(), cp.into()],
                ))
            })?;
        }
    }
    emit(&a.out, &table)
}

fn drift_band(a: DriftBandArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = drift(&a.drift)?;
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t2 in &a.t2.0 {
        let q = JointQuery::new(g, a.t1, t2, b, Some(v)).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(drift_inputs(&a.drift));
        inputs.extend(band_inputs(&b));
        inputs.extend([("t1", a.t1.into()), ("t2", t2.into())]);
        table.eval(inputs, &["terms"], || drift_band_probability(&q, &ctrl, &inv).map(series_point))?;
    }
    emit(&a.out, &table)
}

fn drift_tail(a: DriftTailArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = drift(&a.drift)?;
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv) = (a.series.control(), a.inv.control());
    let mut table = Table::default();
    for &t in &a.t.0 {
        let q = JointQuery::new(g, t, f64::INFINITY, b, Some(v)).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(drift_inputs(&a.drift));
        inputs.extend(band_inputs(&b));
        inputs.push(("t", t.into()));
        table.eval(inputs, &["terms", "scaled"], || {
            let s = drift_tail_scaled(&q, &ctrl, &inv)?;
            let f = (-v.alpha() * t).exp();
            Ok(((f * s.value).into(), (f * s.residual_bound).into(), vec![s.terms.into(), s.value.into()]))
        })?;
    }
    emit(&a.out, &table)
}

fn drift_asymp(a: DriftAsympArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = drift(&a.drift)?;
    let b = band_of(&a.band)?;
    let mut table = Table::default();
    for &t in &a.t.0 {
        let q = JointQuery::new(g, t, f64::INFINITY, b, Some(v)).map_err(usage)?;
        let mut inputs = geom_inputs(&a.geom);
        inputs.extend(drift_inputs(&a.drift));
        inputs.extend(band_inputs(&b));
        inputs.push(("t", t.into()));
        table.eval(inputs, &[], || Ok((drift_tail_asymptotic(&q)?.into(), Field::Null, vec![])))?;
    }
    emit(&a.out, &table)
}

fn mc(a: McArgs) -> Result<(), Failure> {
    let g = geometry(&a.geom)?;
    let v = Drift::new(a.v1, a.v_perp).map_err(usage)?;
    let dr = (!v.is_zero()).then_some(v);
    let b = band_of(&a.band)?;
    check_controls(&a.series, Some(&a.inv))?;
    let (ctrl, inv): (_, InversionControl) = (a.series.control(), a.inv.control());
    let horizon = a.horizon.unwrap_or(if a.t2.is_finite() { a.t2 } else { McConfig::default().time_horizon });
    let cfg = McConfig {
        n_paths: a.paths,
        base_step: a.base_step,
        boundary_fraction: a.boundary_fraction,
        min_step: a.min_step,
        escape_radius: a.escape_radius,
        time_horizon: horizon,
        seed: a.seed,
    };
    cfg.validate(&g).map_err(usage)?;

    let mut inputs = geom_inputs(&a.geom);
    inputs.extend([("v1", a.v1.into()), ("v_perp", a.v_perp.into())]);
    let (est, series) = match a.lambda {
        Some(lambda) => {
            inputs.extend([
                ("lambda", lambda.into()),
                ("u_axis", a.u.u_axis.into()),
                ("u_perp", a.u.u_perp.into()),
                ("gamma", a.gamma.into()),
            ]);
            let u = Exponent { u_axis: a.u.u_axis, u_perp: a.u.u_perp, gamma: a.gamma };
            let series = match &dr {
                Some(v) => drift_joint_laplace(&g, v, lambda, u.u_axis, u.u_perp, u.gamma, &ctrl),
                None => joint_laplace(&g, lambda, u.u_axis, u.u_perp, &ctrl),
            };
            (estimate_laplace_functional(&g, dr.as_ref(), lambda, &u, &cfg), series)
        }
        None => {
            inputs.extend(band_inputs(&b));
            inputs.extend([("t1", a.t1.into()), ("t2", a.t2.into())]);
            let q = JointQuery::new(g, a.t1, a.t2, b, dr).map_err(usage)?;
            let series = match dr {
                Some(_) => drift_band_probability(&q, &ctrl, &inv),
                None => band_probability(&q, &ctrl, &inv),
            };
            (estimate(&g, dr.as_ref(), &[q], &cfg).map(|mut v| v.remove(0)), series)
        }
    };
    inputs.extend([("paths", a.paths.into()), ("seed", a.seed.into()), ("horizon", horizon.into())]);
    let est = est.map_err(|e| if is_usage(&e) { usage(e) } else { Failure::Numeric(e.to_string()) })?;

    let mut table = Table::default();
    let keys = ["series", "series_residual", "z", "n_censored", "n_escaped", "n_horizon", "bias_bound"];
    table.eval(inputs, &keys, || {
        let s = series?;
        Ok((
            est.estimate.into(),
            est.std_err.into(),
            vec![
                s.value.into(),
                s.residual_bound.into(),
                ((s.value - est.estimate) / est.std_err).into(),
                est.n_censored.into(),
                est.n_escaped.into(),
                est.n_horizon.into(),
                est.bias_bound.into(),
            ],
        ))
    })?;
    emit(&a.out, &table)
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    let suites = if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite.clone() };
    let opts = VerifyOptions { mc_paths: a.paths, seed: a.seed };
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for s in suites {
        let (passed, worst, summary, seconds) = match verify::run(s, &opts) {
            Ok(c) => {
                println!("{c}");
                if a.verbose {
                    for d in &c.details {
                        println!("    {d}");
                    }
                }
                (c.passed, c.worst, c.summary, c.seconds)
            }
            Err(e) => {
                println!("[FAIL] {s}: {e}");
                (false, f64::NAN, e.to_string(), f64::NAN)
            }
        };
        if !passed {
            failed.push(s.name());
        }
        records.push(Record {
            inputs: vec![("suite", s.name().into()), ("paths", a.paths.into()), ("seed", a.seed.into())],
            value: worst.into(),
            error: Field::Null,
            meta: vec![("passed", passed.into()), ("seconds", seconds.into()), ("summary", summary.into())],
        });
    }
    if a.output.is_some() {
        write_table(a.format, a.output.as_deref(), &records)?;
    }
    io::stdout().flush().ok();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("failed suites: {}", failed.join(", "))))
    }
}
