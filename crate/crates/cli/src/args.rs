use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spherehit::inversion::{InversionControl, InversionMethod};
use spherehit::verify::Suite;
use spherehit::SeriesControl;

use crate::grid::{band, whole, Grid};

/// Joint law of the first hitting time and place of a sphere by Brownian
/// motion: series evaluation, asymptotics and simulation.
#[derive(Parser, Debug)]
#[command(name = "spherehit", version)]
pub struct Cli {
    /// Flat `key = value` file of flag defaults (flags on the command line win)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Joint Laplace transform E[exp(-lambda sigma + <u, B_sigma>); sigma < inf]
    Laplace(LaplaceArgs),
    /// Joint density of (sigma, B_sigma) on a (t, x) grid
    Density(DensityArgs),
    /// Density of the hitting place (time-marginal) on an x grid
    Marginal(MarginalArgs),
    /// P(t1 < sigma <= t2, B_sigma in band)
    Band(BandArgs),
    /// Tail probability P(t < sigma < inf, B_sigma in band) from outside
    Tail(TailArgs),
    /// Leading-order tail asymptotic
    Asymp(AsympArgs),
    /// Joint Laplace transform under constant drift
    DriftLaplace(DriftLaplaceArgs),
    /// Joint density under constant drift, averaged over the residual angle
    DriftDensity(DriftDensityArgs),
    /// Band probability under constant drift
    DriftBand(DriftBandArgs),
    /// Tail probability under constant drift
    DriftTail(DriftTailArgs),
    /// Leading-order drifted tail asymptotic
    DriftAsymp(DriftAsympArgs),
    /// Monte Carlo estimate next to the matching series value
    Mc(McArgs),
    /// Run verification suites and print one pass/fail line per suite
    Verify(VerifyArgs),
}

pub const COMMANDS: [&str; 13] = [
    "laplace",
    "density",
    "marginal",
    "band",
    "tail",
    "asymp",
    "drift-laplace",
    "drift-density",
    "drift-band",
    "drift-tail",
    "drift-asymp",
    "mc",
    "verify",
];

#[derive(Args, Debug, Clone)]
pub struct GeomArgs {
    /// Dimension, >= 2
    #[arg(long)]
    pub d: u32,
    /// Distance of the start from the centre
    #[arg(long)]
    pub a: f64,
    /// Sphere radius
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
}

#[derive(Args, Debug, Clone)]
pub struct DriftArgs {
    /// Drift component along the start axis
    #[arg(long, allow_hyphen_values = true)]
    pub v1: f64,
    /// Drift component orthogonal to the start axis, >= 0
    #[arg(long, default_value_t = 0.0)]
    pub v_perp: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    /// Largest series degree
    #[arg(long, default_value_t = SeriesControl::default().n_max)]
    pub n_max: usize,
    /// Absolute truncation tolerance
    #[arg(long, default_value_t = SeriesControl::default().abs_tol)]
    pub abs_tol: f64,
}

impl SeriesArgs {
    pub fn control(&self) -> SeriesControl {
        SeriesControl { n_max: self.n_max, abs_tol: self.abs_tol }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InvArgs {
    /// Laplace inversion: saddle-parabola, fixed-talbot or gaver-stehfest
    #[arg(long, default_value = "saddle-parabola")]
    pub inversion: InversionMethod,
    /// Nodes for the fixed-node inversions
    #[arg(long, default_value_t = InversionControl::default().nodes)]
    pub nodes: usize,
    /// Repeat every inversion with a second method and fail on disagreement
    #[arg(long)]
    pub cross_check: bool,
}

impl InvArgs {
    pub fn control(&self) -> InversionControl {
        InversionControl { method: self.inversion, nodes: self.nodes, cross_check: self.cross_check }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (default: standard output)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BandArg {
    /// Band `lo,hi` of the axial coordinate x = <B_sigma, e1>/r
    #[arg(long, value_parser = band, default_value = "-1,1", allow_hyphen_values = true)]
    pub band: (f64, f64),
}

#[derive(Args, Debug, Clone)]
pub struct ExponentArgs {
    /// Exponent component along the start axis
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u_axis: f64,
    /// Exponent component orthogonal to the start axis, >= 0
    #[arg(long, default_value_t = 0.0)]
    pub u_perp: f64,
}

#[derive(Args, Debug)]
pub struct LaplaceArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    /// Rate grid
    #[arg(long)]
    pub lambda: Grid,
    #[command(flatten)]
    pub u: ExponentArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    /// Grid of x in [-1, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub x: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    /// Grid of x in [-1, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub x: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct BandArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Window start
    #[arg(long, default_value_t = 0.0)]
    pub t1: f64,
    /// Grid of window ends
    #[arg(long, default_value = "inf")]
    pub t2: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct TailArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct AsympArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    /// Also evaluate the series tail and the ratio to the asymptotic
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DriftLaplaceArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub drift: DriftArgs,
    /// Rate grid
    #[arg(long)]
    pub lambda: Grid,
    #[command(flatten)]
    pub u: ExponentArgs,
    /// Angle between the orthogonal parts of u and v
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DriftDensityArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub drift: DriftArgs,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    /// Grid of x in [-1, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub x: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DriftBandArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub drift: DriftArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Window start
    #[arg(long, default_value_t = 0.0)]
    pub t1: f64,
    /// Grid of window ends
    #[arg(long, default_value = "inf")]
    pub t2: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DriftTailArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub drift: DriftArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DriftAsympArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    #[command(flatten)]
    pub drift: DriftArgs,
    #[command(flatten)]
    pub band: BandArg,
    /// Time grid
    #[arg(long)]
    pub t: Grid,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub geom: GeomArgs,
    /// Drift along the start axis (no drift when both components are 0)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v1: f64,
    /// Drift orthogonal to the start axis, >= 0
    #[arg(long, default_value_t = 0.0)]
    pub v_perp: f64,
    /// Number of paths, e.g. 1e6
    #[arg(long, value_parser = whole, default_value = "1e5")]
    pub paths: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub band: BandArg,
    /// Window start
    #[arg(long, default_value_t = 0.0)]
    pub t1: f64,
    /// Window end
    #[arg(long, default_value_t = f64::INFINITY)]
    pub t2: f64,
    /// Estimate the Laplace functional at this rate instead of a band probability
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub u: ExponentArgs,
    /// Angle between the orthogonal parts of u and v
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Step cap near the sphere
    #[arg(long, default_value_t = 0.01)]
    pub base_step: f64,
    /// Step standard deviation as a fraction of the distance to the sphere
    #[arg(long, default_value_t = 0.2)]
    pub boundary_fraction: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub min_step: f64,
    /// Censoring radius (ignored for d = 2)
    #[arg(long, default_value_t = 50.0)]
    pub escape_radius: f64,
    /// Censoring time (default: t2 when finite, else 100)
    #[arg(long)]
    pub horizon: Option<f64>,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub inv: InvArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite to run; repeat for several (default: all)
    #[arg(long)]
    pub suite: Vec<Suite>,
    /// Paths for the simulation suite
    #[arg(long, value_parser = whole, default_value = "1e6")]
    pub paths: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Print the per-case lines of each suite
    #[arg(long, short)]
    pub verbose: bool,
    /// Also write the results as a table
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}
