mod commands;
mod compare;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rapidplace::error::Error;
use rapidplace::optimizers::{Algorithm, CoolingSchedule};

/// Hard-block placement for cascaded systolic designs.
#[derive(Parser, Debug)]
#[command(name = "rapidplace", version, about)]
struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize one repeating rectangle and write the full-chip bundle.
    Place(commands::PlaceArgs),
    /// Seed sweeps over several algorithms, summarized as a table.
    Compare(compare::CompareArgs),
    /// Draw a placement file as an SVG floorplan.
    Svg(commands::SvgArgs),
    /// Start a search on another device from a finished bundle.
    Transfer(commands::TransferArgs),
    /// Score a placement file and check its legality.
    Evaluate(commands::EvaluateArgs),
    /// Write a bundled or synthetic device descriptor.
    DeviceGen(commands::DeviceGenArgs),
}

/// Optimizer settings. Flags override `--config`, which overrides defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct OptimizerArgs {
    /// JSON file with optimizer settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    evals: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    schedule: Option<CoolingSchedule>,
    /// Initial annealing temperature.
    #[arg(long)]
    t0: Option<f64>,
    /// Hyperbolic cooling rate.
    #[arg(long)]
    beta: Option<f64>,
    /// Initial CMA-ES step size.
    #[arg(long)]
    sigma0: Option<f64>,
}

/// Exit status contract: 0 success, 2 usage or validation, 3 infeasible,
/// 4 internal error.
fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Infeasible(_) | Error::NoFit(_) => 3,
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::Config(_)
        | Error::Io { .. }
        | Error::MissingAssignment(_)
        | Error::Overflow(_) => 2,
        Error::NonFinite(_) | Error::Flow { .. } => 4,
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("RAPIDPLACE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "RAPIDPLACE_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log)
        .format_timestamp(None)
        .init();
    let outcome = init_threads().and_then(|()| match cli.command {
        Command::Place(a) => commands::place(&a),
        Command::Compare(a) => compare::compare(&a),
        Command::Svg(a) => commands::svg(&a),
        Command::Transfer(a) => commands::transfer(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::DeviceGen(a) => commands::device_gen(&a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // the message already carries the wrapped cause
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
