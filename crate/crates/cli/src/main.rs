use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use optomech_witness_cli::{commands, exit, output, CliError, Command, CommandResult, Format, Report, RunConfig};

/// Entanglement witness toolkit for pulsed opto-mechanical pair sources.
#[derive(Debug, Parser)]
#[command(name = "omwitness", version)]
struct Args {
    command: Command,
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Fixed oracle cutoff for `verify`.
    #[arg(long)]
    cutoff: Option<usize>,
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.command = Some(args.command);
    if args.out.is_some() {
        config.output.path = args.out.clone();
    }
    if args.format.is_some() {
        config.output.format = args.format;
    }
    if args.seed.is_some() {
        config.statistics.seed = args.seed;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    if args.cutoff.is_some() {
        config.cutoff = args.cutoff;
    }
    config.output.format = Some(config.format());
    Ok(config)
}

fn execute(args: &Args) -> Result<(), CliError> {
    let config = resolve(args)?;
    config.check_basic()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let result = commands::run(&config)?;
    let failed = match &result {
        CommandResult::Verify { passed: false, max_abs_diff, tolerance, .. } => Some(CliError::VerificationFailed {
            max: *max_abs_diff,
            tolerance: *tolerance,
        }),
        _ => None,
    };
    let format = config.format();
    let path = config.output.path.clone();
    let report = Report { config, result };
    output::write(&output::render(&report, format)?, path.as_deref())?;
    match failed {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("omwitness: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
