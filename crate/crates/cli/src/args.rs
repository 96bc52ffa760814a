use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nwheat", version, about = "Certified evaluation and inequality replay for nowhere time-analytic heat solutions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    pub prec: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized grids.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Disable the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolutionArg {
    U1,
    U2,
    Weps,
}

#[derive(Debug, Args)]
pub struct SolutionSel {
    #[arg(long, value_enum)]
    pub solution: SolutionArg,
    /// Exponent of `w_eps`, in (0, 1); required iff `--solution weps`.
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a solution at one point or at random points.
    Eval(EvalArgs),
    /// Time derivatives at a point.
    Derivative(DerivativeArgs),
    /// Taylor-coefficient roots of the orders 2 m_N and 2 m_N + 1 against the analytic floor.
    Taylor(TaylorArgs),
    /// Dominance and derivative lower-bound replay, with the threshold N0.
    ProofReplay(ReplayArgs),
    /// Growth-envelope constants for w_eps, optionally checked on a grid.
    Envelope(EnvelopeArgs),
    /// Central-difference heat residual on a grid.
    Residual(ResidualArgs),
    /// Observed bound for the kernel-derivative hypothesis of the condensation series.
    Walczak(WalczakArgs),
    /// Render a CSV from `taylor` or `envelope` as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub sel: SolutionSel,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Evaluate at this many random points of `--x-range` x `--t-range`.
    #[arg(long, conflicts_with_all = ["x", "t"])]
    pub random: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value = "0,2")]
    pub x_range: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
    pub t_range: String,
    /// Requested enclosure radius.
    #[arg(long, default_value_t = 1e-30)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct DerivativeArgs {
    #[command(flatten)]
    pub sel: SolutionSel,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: String,
    /// Orders: a list `1,3,5`, a range `1..10`, or a mix.
    #[arg(long)]
    pub n: String,
}

#[derive(Debug, Args)]
pub struct TaylorArgs {
    #[command(flatten)]
    pub sel: SolutionSel,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: String,
    #[arg(long, default_value_t = 1)]
    pub nmin: u32,
    #[arg(long, default_value_t = 20)]
    pub nmax: u32,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub sel: SolutionSel,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// One or more comma-separated times.
    #[arg(long, allow_hyphen_values = true, default_value = "0,1,sqrt(2)")]
    pub t0: String,
    #[arg(long, default_value_t = 25)]
    pub nmax: u32,
    /// Replay at most this many indices from N0 on (default: up to nmax).
    #[arg(long)]
    pub rows: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long)]
    pub eps: String,
    /// Check the bound on the grid.
    #[arg(long)]
    pub check: bool,
    #[arg(long, allow_hyphen_values = true, default_value = "-200,200")]
    pub x_range: String,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-10,10")]
    pub t_range: String,
    #[arg(long, default_value_t = 21)]
    pub nt: usize,
    /// Also report K at these comma-separated x > 100.
    #[arg(long)]
    pub k_at: Option<String>,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub sel: SolutionSel,
    #[arg(long, allow_hyphen_values = true, default_value = "0,2")]
    pub x_range: String,
    #[arg(long, default_value_t = 5)]
    pub nx: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
    pub t_range: String,
    #[arg(long, default_value_t = 5)]
    pub nt: usize,
    #[arg(long, default_value = "1/1000")]
    pub h: String,
    /// Include the range end points instead of using cell centres.
    #[arg(long)]
    pub vertices: bool,
    /// Pass threshold for the maximum residual (default: the truncation budget).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WalczakArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub x0: String,
    #[arg(long, default_value = "1/2")]
    pub delta0: String,
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long, default_value_t = 40)]
    pub nmax: u32,
    /// Grid `k / 4` for `A < k / 4 <= t-max`.
    #[arg(long, default_value_t = 100)]
    pub t_max: u32,
    /// Include the mirrored negative times.
    #[arg(long)]
    pub both_signs: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV written by `taylor` or `envelope --check`.
    #[arg(long)]
    pub input: PathBuf,
}
