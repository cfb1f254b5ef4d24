//! `limb` — lower-bound energy estimates for learning-in-memory AI
//! training: estimators, schedule trajectories, trend fitting, baseline
//! comparisons, and Monte Carlo validation, with machine-readable output.

mod commands;
mod config;
mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use output::{EnergyUnits, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "limb",
    version,
    about = "Lower-bound energy-dissipation estimates for learning-in-memory AI training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy estimates for one workload
    Estimate(EstimateArgs),
    /// Sweep estimators over a gamma grid
    Sweep(SweepArgs),
    /// Barrier and power profile along a schedule
    Trajectory(TrajectoryArgs),
    /// Fit the params-to-FLOPs trend and project it
    Fit(FitArgs),
    /// Compare baseline efficiencies against the estimator family
    Compare(CompareArgs),
    /// Monte Carlo experiments
    #[command(subcommand)]
    Mc(McCommand),
}

#[derive(Subcommand)]
enum McCommand {
    /// Two-state kinetics: simulated net rate vs the analytic formula
    Kinetics(KineticsArgs),
    /// Quantized two-parameter descent walk
    Walk(WalkArgs),
    /// Realized dissipation audit over a descent-walk ensemble
    Audit(AuditArgs),
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; command-line flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Temperature in kelvin (env LIMB_TEMP_K, default 300)
    #[arg(long, value_name = "K")]
    temperature: Option<f64>,
    /// Relative tolerance for series evaluation (default 1e-9)
    #[arg(long, value_name = "TOL")]
    tolerance: Option<f64>,
    /// Output format (default json)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write the document to this path instead of standard output
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,
    /// Omit the timestamp so identical runs are byte-identical
    #[arg(long)]
    no_timestamp: bool,
    /// Display unit for energy columns (default J); internal math unchanged
    #[arg(long, value_enum)]
    units: Option<EnergyUnits>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated methods: lim-a, lim-a-closed, lim-b, lim-b-ub,
    /// lim-b-lb, lim-b-lb-finite, lim-a-exp, lim-b-exp, ceb, landauer-meas
    #[arg(long)]
    method: Option<String>,
    /// Training operation count
    #[arg(long)]
    flops: Option<f64>,
    /// Model parameter (memory element) count
    #[arg(long)]
    params: Option<f64>,
    /// Precision in bits; delta = 2^-bits (mutually exclusive with --delta)
    #[arg(long)]
    bits: Option<f64>,
    /// Retention precision delta in (0, 1]
    #[arg(long)]
    delta: Option<f64>,
    /// Update-rate schedule: poly:G, exp:G, expunit, logpoly (default poly:2)
    #[arg(long)]
    schedule: Option<String>,
    /// Decay exponent for closed-form methods (defaults to the schedule's)
    #[arg(long)]
    gamma: Option<f64>,
    /// Learning-rate offset n0 in eps_n = 1/(n + n0)
    #[arg(long)]
    lr_offset: Option<f64>,
    /// Energy per bit in joules for the CEB method (default kT log(1/delta))
    #[arg(long)]
    ebit: Option<f64>,
    /// Truncation length for lim-b-lb-finite (default floor(1/delta))
    #[arg(long)]
    n_trunc: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated methods (default lim-a,lim-b)
    #[arg(long)]
    method: Option<String>,
    /// Gamma grid START:STOP:COUNT, geometrically spaced
    #[arg(long)]
    gamma: Option<String>,
    /// Schedule family for the numeric methods: poly or exp (default poly)
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    flops: Option<f64>,
    #[arg(long)]
    params: Option<f64>,
    #[arg(long)]
    bits: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    lr_offset: Option<f64>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Update-rate schedule: poly:G, exp:G, expunit, logpoly (default poly:2)
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    lr_offset: Option<f64>,
    #[arg(long)]
    bits: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Switching ceiling in updates per second (default 1e12)
    #[arg(long)]
    rmax: Option<f64>,
    /// Number of logarithmically spaced sample points (default 200)
    #[arg(long)]
    points: Option<f64>,
    /// Largest step index sampled (default 1e6)
    #[arg(long)]
    nmax: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model records CSV: name,params,flops,reported_energy_j
    #[arg(long)]
    data: Option<PathBuf>,
    /// Breakpoint between the two scaling regimes (default 1e9 params)
    #[arg(long)]
    breakpoint: Option<f64>,
    /// Fit slopes freely instead of pinning them to (2, 1)
    #[arg(long)]
    free_slopes: bool,
    /// Also project FLOPs for this parameter count
    #[arg(long)]
    project: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    flops: Option<f64>,
    #[arg(long)]
    params: Option<f64>,
    #[arg(long)]
    bits: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Baseline key-value config (name, joules_per_flop, notes per entry)
    #[arg(long)]
    baselines: Option<PathBuf>,
    /// Polynomial decay exponent for the estimator rows (default 2)
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct KineticsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Barrier height in kT (default 1)
    #[arg(long)]
    barrier: Option<f64>,
    /// Tilt in kT (default 1)
    #[arg(long)]
    tilt: Option<f64>,
    /// Switching ceiling in updates per second (default 1e6)
    #[arg(long)]
    rmax: Option<f64>,
    /// Number of simulated steps (default 1e7)
    #[arg(long)]
    steps: Option<f64>,
    /// Step duration in seconds (default 1e-8)
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Polynomial decay exponent of the barrier schedule (default 0.5)
    #[arg(long)]
    gamma: Option<f64>,
    /// Retention precision entering the barrier profile (default 0.5)
    #[arg(long)]
    delta: Option<f64>,
    /// Loss-to-tilt conversion factor (default 4)
    #[arg(long)]
    beta: Option<f64>,
    /// Grid pitch of the quantized parameters (default 1)
    #[arg(long)]
    grid_step: Option<f64>,
    /// Start position, grid units (default 10, 10)
    #[arg(long)]
    start_x: Option<i64>,
    #[arg(long)]
    start_y: Option<i64>,
    /// Steps per trial (default 1e4)
    #[arg(long)]
    steps: Option<f64>,
    /// Trials in the ensemble (default 200)
    #[arg(long)]
    trials: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Success radius around the minimizer, grid units (default 2)
    #[arg(long)]
    radius: Option<f64>,
    /// Hold the barrier at this height instead of following the schedule
    #[arg(long)]
    frozen_barrier: Option<f64>,
    /// Quadratic loss coefficients q11,q12,q22 (default 1,0,1)
    #[arg(long)]
    loss: Option<String>,
    /// Dump per-step samples as CSV (trial,step,wx,wy,loss,hop)
    #[arg(long, value_name = "PATH")]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    walk: WalkArgs,
    /// Dissipation accounting: lim-a (tilt) or lim-b (barrier), default lim-b
    #[arg(long)]
    accounting: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    return ExitCode::SUCCESS;
                }
                _ => {
                    // one-line actionable message, exit status 1
                    let rendered = e.render().to_string();
                    let line = rendered.lines().next().unwrap_or("invalid arguments");
                    eprintln!("{line}");
                    return ExitCode::from(1);
                }
            }
        }
    };

    let result = match &cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Trajectory(args) => commands::trajectory(args),
        Command::Fit(args) => commands::fit(args),
        Command::Compare(args) => commands::compare(args),
        Command::Mc(McCommand::Kinetics(args)) => commands::mc_kinetics(args),
        Command::Mc(McCommand::Walk(args)) => commands::mc_walk(args),
        Command::Mc(McCommand::Audit(args)) => commands::mc_audit(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
