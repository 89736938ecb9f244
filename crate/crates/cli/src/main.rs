//! `degwave`: simulation and attractor-analysis pipelines.
//!
//! Exit codes: 0 success, 1 output failure, 2 bad config or input,
//! 3 integration failure, 4 no scaling window.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "degwave", version, about = "Wave equation with degenerate nonlocal damping")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Problem config (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Time horizon; each command has its own default.
    #[arg(long = "T", global = true)]
    pub horizon: Option<f64>,
    /// Radius of the degenerate region (dimension) or largest threshold (vw-report).
    #[arg(long, global = true)]
    pub eps0: Option<f64>,
    /// Scale ratio of the box-counting sequence.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Overrides the number of modes.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one trajectory and audit the energy equality.
    Simulate(SimulateArgs),
    /// Small-data decay runs with two-sided fits.
    Decay(DecayArgs),
    /// Probe the absorbing radius and sample an attractor cloud.
    Sample(SampleArgs),
    /// Box-counting and two-regime dimension report of a cloud or point set.
    Dimension(DimensionArgs),
    /// The `u = v + w` decomposition of one trajectory.
    Decompose(SimulateArgs),
    /// Linearized flow along one trajectory with the `Λ_U` functional.
    Linearize(LinearizeArgs),
    /// Contraction of `V` and size of `W` at cloud samples.
    VwReport(VwArgs),
    /// Check the Gronwall-type hypotheses on sampled `F, φ, ψ`.
    Gronwall(GronwallArgs),
    /// Write a synthetic point set with known dimension.
    Fixture(FixtureArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Phase norm of the initial data.
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    /// Number of low modes carrying the initial data.
    #[arg(long, default_value_t = 4)]
    pub n_low: usize,
    /// Output spacing.
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Log-spaced output times per run.
    #[arg(long, default_value_t = 600)]
    pub n_out: usize,
    /// Initial phase norm as a fraction of the probed decay radius.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 64)]
    pub members: usize,
    /// Largest initial phase norm of the ensemble.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 50.0)]
    pub burn_in: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub stride: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Greedy,
    Grid,
}

#[derive(Args, Debug)]
pub struct DimensionArgs {
    /// Attractor cloud in the binary format.
    #[arg(long, conflicts_with = "points")]
    pub cloud: Option<PathBuf>,
    /// Plain point set: one comma-separated point per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Greedy)]
    pub method: Method,
    /// Number of scales after the first.
    #[arg(long, default_value_t = 16)]
    pub m_max: usize,
    /// Degenerate-cover scales `ε₀2^{-m}`, `m = 1..=m_inner`.
    #[arg(long, default_value_t = 12)]
    pub m_inner: usize,
}

#[derive(Args, Debug)]
pub struct LinearizeArgs {
    /// Phase norm of the base point.
    #[arg(long, default_value_t = 0.1)]
    pub norm: f64,
    #[arg(long, default_value_t = 200)]
    pub n_out: usize,
}

#[derive(Args, Debug)]
pub struct VwArgs {
    /// Cloud to draw samples from; without it, unit-ball data are used.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long, default_value_t = 8)]
    pub dirs: usize,
    /// Rungs of the threshold ladder `ε₀2^{-j}`.
    #[arg(long, default_value_t = 3)]
    pub rungs: usize,
    /// Rungs of the time ladder `0.5·2^j`.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
}

#[derive(Args, Debug)]
pub struct GronwallArgs {
    /// CSV with header `t,F,phi,psi` on a uniform grid.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub c1: f64,
    #[arg(long)]
    pub c2: f64,
    /// Relative slack on the discrete differential inequality.
    #[arg(long, default_value_t = 1e-4)]
    pub slack: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FixtureKind {
    Segment,
    Square,
    Cantor,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    #[arg(value_enum)]
    pub kind: FixtureKind,
    /// Points (segment), side (square) or depth (Cantor dust).
    #[arg(long, default_value_t = 2000)]
    pub size: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Decay(a) => commands::decay(g, a),
        Command::Sample(a) => commands::sample(g, a),
        Command::Dimension(a) => commands::dimension(g, a),
        Command::Decompose(a) => commands::decompose(g, a),
        Command::Linearize(a) => commands::linearize(g, a),
        Command::VwReport(a) => commands::vw_report(g, a),
        Command::Gronwall(a) => commands::gronwall(g, a),
        Command::Fixture(a) => commands::fixture(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
