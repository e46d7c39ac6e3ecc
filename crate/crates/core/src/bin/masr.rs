use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use masr::config::{load_config_as, Scale, ScenarioConfig};
use masr::error::HarnessError;
use masr::harness::{sweep, to_csv, to_json, write_outputs, OutputFormat, Scheme, SweepAxis};

/// Monte Carlo sweeps of the movable-antenna symbiotic radio schemes.
#[derive(Debug, Parser)]
#[command(name = "masr", version)]
struct Cli {
    /// JSON scenario file; omitted keys take preset defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed of trial 0; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sweep: Option<SweepAxis>,
    /// Comma-separated axis values (dBm for power).
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    values: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    scale: Option<Scale>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Comma-separated subset of ma-sa-pso, ma-pso, fa, random-beam.
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<Scheme>,
    /// Exit with status 3 if any scheme found the BER cap unreachable.
    #[arg(long)]
    strict: bool,
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => load_config_as(path, cli.scale)?,
        None => ScenarioConfig::preset(cli.scale.unwrap_or_default()),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let trials = cli.trials.unwrap_or(config.trials);
    let schemes = if cli.schemes.is_empty() {
        Scheme::ALL.to_vec()
    } else {
        cli.schemes
    };
    let report = sweep(&config, cli.sweep, &cli.values, trials, &schemes)?;
    match &cli.output {
        Some(path) => write_outputs(&report, path, cli.format)?,
        None => match cli.format {
            OutputFormat::Csv => print!("{}", to_csv(&report)),
            OutputFormat::Json => print!("{}", to_json(&report)?),
        },
    }
    Ok(report.has_outage())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let strict = cli.strict;
    match run(cli) {
        Ok(true) if strict => {
            eprintln!("masr: at least one scheme could not meet the BER cap");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("masr: {e}");
            match e {
                HarnessError::Config(_)
                | HarnessError::EmptyValues
                | HarnessError::NoSchemes
                | HarnessError::ArrayTooLarge { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
