use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "klnmf", version, about = "KL-divergence NMF solvers and benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic problem and write X, W*, H*, H*H*ᵀ as CSV.
    Synth(SynthArgs),
    /// Run one algorithm on one problem.
    Solve(SolveArgs),
    /// Re-run a solve from the manifest it wrote.
    Replay(ReplayArgs),
    /// Run algorithms over many instances and write an aggregate table.
    Bench(BenchArgs),
    /// Turn a trace CSV into gnuplot-ready data and script files.
    Plot(PlotArgs),
    /// List registered algorithms.
    List,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub dirichlet_alpha: f64,
    /// Output directory.
    #[arg(long, env = "KLNMF_OUT_DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegArg {
    None,
    L1,
    Fro,
}

impl RegArg {
    pub fn as_str(self) -> &'static str {
        match self {
            RegArg::None => "none",
            RegArg::L1 => "l1",
            RegArg::Fro => "fro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepArg {
    Joint,
    Split,
}

impl StepArg {
    pub fn as_str(self) -> &'static str {
        match self {
            StepArg::Joint => "joint",
            StepArg::Split => "split",
        }
    }
}

/// Options shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct AlgoArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub reg: RegArg,
    #[arg(long, default_value_t = 0.0)]
    pub mu_w: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu_h: f64,
    /// Restart threshold for MMBPGe and MUe.
    #[arg(long, default_value_t = 0.999)]
    pub rho: f64,
    #[arg(long, value_enum, default_value = "joint")]
    pub step: StepArg,
    /// Step multiplier `c` in `λ = c/L`; `cw,ch` sets the blocks separately.
    #[arg(long)]
    pub lambda_scale: Option<String>,
    /// Shrink λ slightly so that λL < 1 holds strictly.
    #[arg(long)]
    pub strict_step: bool,
    /// Disable extrapolation (β ≡ 0) in MMBPGe and MUe.
    #[arg(long)]
    pub no_extrapolate: bool,
    #[arg(long, default_value_t = 3000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub trace_every: usize,
    #[arg(long, default_value_t = 100)]
    pub ccd_inner_iters: usize,
    #[arg(long, default_value_t = 2.0)]
    pub agd_c: f64,
    /// Scale the random initial point so that Σ(W⁰H⁰) = ΣX.
    #[arg(long)]
    pub scaled_init: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Dense CSV matrix X.
    #[arg(long, group = "source")]
    pub x: Option<PathBuf>,
    /// Inline synthetic problem `m,n,r` or `m,n,r,sparsity`.
    #[arg(long, group = "source")]
    pub synth: Option<String>,
    /// MovieLens `ratings.csv`.
    #[arg(long, group = "source")]
    pub ratings: Option<PathBuf>,
    /// Inner dimension; required with --x and --ratings.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value = "mmbpge")]
    pub algo: String,
    /// Seeds the synthetic problem; the initial point uses --init-seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for the initial point [default: derived from --seed].
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// Trace CSV path; a manifest is written next to it.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Final factors go to `<prefix>W.csv` and `<prefix>H.csv`.
    #[arg(long)]
    pub factors_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Trace path for the replayed run [default: the manifest's trace path].
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub factors_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Comma-separated sizes `MxNxR`.
    #[arg(long, default_value = "200x200x30")]
    pub sizes: String,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "mmbpg,mmbpge,mu,mue,ccd,agd")]
    pub algos: String,
    #[arg(long, default_value_t = 1.0)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Iteration cap for CCD [default: --max-iter].
    #[arg(long)]
    pub ccd_max_iter: Option<usize>,
    /// Parallel worker slots [default: available cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    #[arg(long, env = "KLNMF_OUT_DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub traces: Vec<PathBuf>,
    /// Column plotted against iteration and time.
    #[arg(long, default_value = "rel_error")]
    pub column: String,
    #[arg(long, env = "KLNMF_OUT_DIR")]
    pub out: PathBuf,
}
