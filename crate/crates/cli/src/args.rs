use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pinn_tsampling::reference::{BURGERS_GRID, LORENZ_STEP};
use pinn_tsampling::theory::rate_grid;

#[derive(Debug, Parser)]
#[command(name = "pinn-ts", version, about = "PINN training with truncated-exponential time sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one network and write history.csv, params.ckpt and summary.json.
    Train(TrainArgs),
    /// Train one network per rate from a shared initialization.
    Sweep(SweepArgs),
    /// Budget-constrained error bound, oracle optimum and rate scan.
    Theory(TheoryArgs),
    /// Dump the reference solution as CSV.
    Reference(ReferenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Linear,
    Burgers,
    Lorenz,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ProblemKind::Linear)]
    pub problem: ProblemKind,
    /// Growth rate of the linear ODE.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Time horizon.
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Adam iterations (default: 500 linear, 10000 otherwise).
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hidden layers (default: 5 linear/lorenz, 9 burgers).
    #[arg(long)]
    pub layers: Option<usize>,
    /// Neurons per hidden layer (default: 10 linear, 20 otherwise).
    #[arg(long)]
    pub width: Option<usize>,
    /// Collocation times (default: 100 linear/lorenz, 50 burgers).
    #[arg(long)]
    pub npoints: Option<usize>,
    /// Uniform times weighted by the density instead of quantile times.
    /// Always on for lorenz.
    #[arg(long)]
    pub weighted: bool,
    /// Record history every this many iterations (default: 10 linear, 100 otherwise).
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Truncated-exponential rate r.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rate: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Rates as lo:hi:step.
    #[arg(long, default_value = "-4:6:1", allow_hyphen_values = true)]
    pub rates: RateRange,
    /// CSV file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 100.0)]
    pub budget: f64,
    /// Cells of the discrete oracle.
    #[arg(long, default_value_t = 10_000)]
    pub grid: usize,
    #[arg(long, default_value = "-6:6:0.05", allow_hyphen_values = true)]
    pub rates: RateRange,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Burgers grid points.
    #[arg(long, default_value_t = BURGERS_GRID)]
    pub nx: usize,
    /// Lorenz RK4 step.
    #[arg(long, default_value_t = LORENZ_STEP)]
    pub h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `lo:hi:step`, inclusive of `hi` when it lies on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl RateRange {
    /// Grid values rounded to 10 decimals so `-6 + 19 * 0.05` prints as `-5.05`.
    pub fn rates(&self) -> Vec<f64> {
        rate_grid(self.lo, self.hi, self.step)
            .expect("validated on parse")
            .into_iter()
            .map(|r| (r * 1e10).round() / 1e10)
            .collect()
    }
}

impl FromStr for RateRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let range = RateRange {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        rate_grid(range.lo, range.hi, range.step).map_err(|e| e.to_string())?;
        Ok(range)
    }
}
