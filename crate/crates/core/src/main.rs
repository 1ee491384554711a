use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use wlbc::config::{
    config_file_jobs, preset_jobs, run_experiment, validate_config, ExperimentSpec, OutputFormat,
    Overrides, Preset,
};
use wlbc::WlbcError;

/// Monte Carlo sweeps for widely linear multiuser precoding with PAM
/// signalling: symbol error rate, sum rate, and selected-user counts.
#[derive(Debug, Parser)]
#[command(name = "wlbc", version, about)]
struct Cli {
    /// Built-in experiment: fig1..fig5
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// TOML scenario file (see README for the schema)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output table path
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,

    /// Output format
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,

    /// Base RNG seed
    #[arg(long)]
    seed: Option<u64>,

    /// Channel realizations per sweep point
    #[arg(long)]
    trials: Option<usize>,

    /// Symbols per user per realization
    #[arg(long)]
    symbols: Option<usize>,

    /// Semi-orthogonality threshold for user selection
    #[arg(long)]
    alpha: Option<f64>,

    #[arg(long)]
    snr_min: Option<f64>,

    #[arg(long)]
    snr_max: Option<f64>,

    #[arg(long)]
    snr_step: Option<f64>,
}

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();

    let ov = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        symbols: cli.symbols,
        alpha: cli.alpha,
        snr_min: cli.snr_min,
        snr_max: cli.snr_max,
        snr_step: cli.snr_step,
    };
    if let Some(step) = cli.snr_step {
        if step <= 0.0 {
            eprintln!("error: --snr-step must be positive");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    }
    if let (Some(min), Some(max)) = (cli.snr_min, cli.snr_max) {
        if max < min {
            eprintln!("error: --snr-max must be >= --snr-min");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    }

    let jobs = match (&cli.preset, &cli.config) {
        (Some(name), None) => match Preset::parse(name) {
            Some(p) => preset_jobs(p, &ov),
            None => {
                eprintln!("error: unknown preset {name:?} (expected fig1..fig5)");
                return ExitCode::from(EXIT_INVALID_CONFIG);
            }
        },
        (None, Some(path)) => match config_file_jobs(path, &ov) {
            Ok(jobs) => jobs,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INVALID_CONFIG);
            }
        },
        _ => {
            eprintln!("error: exactly one of --preset or --config is required");
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };

    let violations = validate_config(&jobs);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("error: {v}");
        }
        return ExitCode::from(EXIT_INVALID_CONFIG);
    }

    let format = match cli.format.as_str() {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        _ => unreachable!("clap validates the format"),
    };
    let spec = ExperimentSpec {
        jobs,
        output_path: cli.out.clone(),
        output_format: format,
    };

    match run_experiment(&spec) {
        Ok(outcome) => {
            eprintln!(
                "wrote {} rows to {} ({} of {} realizations rejected)",
                outcome.rows.len(),
                cli.out.display(),
                outcome.rejected,
                outcome.total_trials
            );
            if outcome.total_trials > 0
                && outcome.rejected as f64 > 0.01 * outcome.total_trials as f64
            {
                eprintln!(
                    "error: {}",
                    WlbcError::TooManyFailures {
                        failed: outcome.rejected,
                        total: outcome.total_trials
                    }
                );
                return ExitCode::from(EXIT_NUMERICAL);
            }
            ExitCode::SUCCESS
        }
        Err(e @ WlbcError::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
