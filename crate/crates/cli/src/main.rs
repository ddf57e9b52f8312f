//! `screenlab`: data generation, single solves, λ sweeps and reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use screenlab::datagen::{DictionaryKind, ObservationKind};
use screenlab::{Algorithm, Strategy, TestKind};

#[derive(Parser, Debug)]
#[command(name = "screenlab", version, about = "Lasso / Group-Lasso solvers with dynamic safe screening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dictionary and observation.
    Gen(GenArgs),
    /// Solve one problem read from disk.
    Solve(SolveArgs),
    /// Run a λ sweep across strategies and write one CSV row per run.
    Bench(BenchArgs),
    /// Aggregate a bench CSV into normalized medians and percentiles.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Dictionary family: gaussian, pnoise or dct.
    #[arg(long, default_value = "gaussian")]
    kind: DictionaryKind,
    /// Observation model: like-atoms, unit-sphere or bernoulli-gaussian.
    #[arg(long, default_value = "like-atoms")]
    obs: ObservationKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, env = "SCREENLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Contiguous group size; 0 writes no group file.
    #[arg(long, default_value_t = 0)]
    group_size: usize,
    #[arg(long, default_value_t = 0.05)]
    bernoulli_p: f64,
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    /// Dictionary output. The observation, group file and manifest are
    /// written next to it as `<stem>.y.dsmx`, `<stem>.groups` and
    /// `<stem>.manifest`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Dictionary (DSMX, or CSV with a .csv extension).
    #[arg(long)]
    dict: PathBuf,
    /// Observation vector (DSMX or CSV).
    #[arg(long)]
    obs: PathBuf,
    /// Group file; solves the Group-Lasso when given.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, conflicts_with = "lambda_ratio", required_unless_present = "lambda_ratio")]
    lambda: Option<f64>,
    /// λ as a fraction of λ*.
    #[arg(long)]
    lambda_ratio: Option<f64>,
    #[arg(long, default_value = "fista")]
    algo: Algorithm,
    #[arg(long, default_value = "dynamic")]
    strategy: Strategy,
    /// Screening test; defaults to dst3 (Lasso) or gst3 (Group-Lasso).
    #[arg(long)]
    test: Option<TestKind>,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    rel_tol: f64,
    /// Stop on the duality gap instead of the relative variation.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Rescale atoms and observation to unit norm instead of rejecting them.
    #[arg(long)]
    normalize: bool,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    /// Pnoise N=200, K=1000, 30 seeds, ratios 0.1..0.9, FISTA + DST3.
    PaperDesk,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Base plan; the flags below override its fields.
    #[arg(long, value_enum, default_value = "paper-desk")]
    preset: Preset,
    #[arg(long)]
    kind: Option<DictionaryKind>,
    #[arg(long)]
    obs: Option<ObservationKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Group size; a positive value benchmarks the Group-Lasso.
    #[arg(long)]
    group_size: Option<usize>,
    /// First seed; runs use `seeds` consecutive seeds from here.
    #[arg(long, env = "SCREENLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of seeds.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long, value_delimiter = ',')]
    tests: Option<Vec<TestKind>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Run cells concurrently (timings become contended).
    #[arg(long)]
    parallel: bool,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MetricArg {
    Flops,
    Time,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Bench CSV produced by `screenlab bench`.
    #[arg(long)]
    input: PathBuf,
    /// Report CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the median curves as an SVG line chart.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "flops")]
    metric: MetricArg,
    #[arg(long)]
    title: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Bench(a) => commands::bench(a),
        Command::Report(a) => commands::report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
