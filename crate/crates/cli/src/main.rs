use std::path::PathBuf;

use clap::{Parser, Subcommand};

use umom_cli::config::{self, ClusterConfig, EstimateConfig, RateSweepConfig, StableCheckConfig};
use umom_cli::error::CliError;
use umom_cli::{run_cluster, run_estimate, run_rate_sweep, run_stable_check};
use umom_core::EstimatorMode;

/// U-statistics with median-of-means robustness: estimation, rate
/// experiments, stable-sampler self-tests and clustering selection.
#[derive(Parser)]
#[command(name = "umom", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a kernel mean from a data file (robust + classical)
    Estimate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Data file: one numeric record per line
        #[arg(long)]
        data: Option<PathBuf>,
        /// Kernel id: product | mean | variance
        #[arg(long)]
        kernel: Option<String>,
        /// Confidence level in (0, 1/2); sets V = 32 m ceil(ln(1/delta))
        #[arg(long)]
        delta: Option<f64>,
        /// Explicit block count (overrides the confidence rule)
        #[arg(long)]
        blocks: Option<usize>,
        /// combinations | diagonal
        #[arg(long)]
        mode: Option<String>,
        /// Pre-shuffle the index assignment with this seed
        #[arg(long)]
        shuffle_seed: Option<u64>,
        /// Write a JSON record here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo deviation rates across sample sizes (CSV output)
    RateSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Restrict the median-of-means side: combinations | diagonal
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Write the CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-tests of the stable sampler (exit 3 on failure)
    StableCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clustering-risk estimation and partition selection (CSV output)
    Cluster {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Write the CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(text: &str) -> Result<EstimatorMode, CliError> {
    match text {
        "combinations" => Ok(EstimatorMode::Combinations),
        "diagonal" => Ok(EstimatorMode::Diagonal),
        other => Err(CliError::validation(format!(
            "unknown mode '{other}': expected 'combinations' or 'diagonal'"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate {
            config,
            data,
            kernel,
            delta,
            blocks,
            mode,
            shuffle_seed,
            out,
        } => {
            let mut cfg: EstimateConfig = match config {
                Some(path) => config::load(&path)?,
                None => EstimateConfig::default(),
            };
            if data.is_some() {
                cfg.data = data;
            }
            if kernel.is_some() {
                cfg.kernel = kernel;
            }
            if delta.is_some() {
                cfg.delta = delta;
            }
            if blocks.is_some() {
                cfg.blocks = blocks;
            }
            if let Some(m) = mode {
                cfg.mode = Some(parse_mode(&m)?);
            }
            if shuffle_seed.is_some() {
                cfg.shuffle_seed = shuffle_seed;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let outcome = run_estimate(&cfg)?;
            print!("{}", outcome.render());
            Ok(())
        }
        Command::RateSweep {
            config,
            seed,
            delta,
            mode,
            replicates,
            out,
        } => {
            let mut cfg: RateSweepConfig = config::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if let Some(m) = mode {
                cfg.mode = Some(parse_mode(&m)?);
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let outcome = run_rate_sweep(&cfg)?;
            print!("{}", outcome.csv);
            Ok(())
        }
        Command::StableCheck { config, seed, out } => {
            let mut cfg: StableCheckConfig = match config {
                Some(path) => config::load(&path)?,
                None => StableCheckConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let outcome = run_stable_check(&cfg)?;
            print!("{}", outcome.report);
            if outcome.all_pass {
                Ok(())
            } else {
                Err(CliError::CheckFailed(
                    "stable sampler self-tests failed".into(),
                ))
            }
        }
        Command::Cluster {
            config,
            seed,
            delta,
            out,
        } => {
            let mut cfg: ClusterConfig = config::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let outcome = run_cluster(&cfg)?;
            print!("{}", outcome.report);
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
