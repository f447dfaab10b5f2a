use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use featcomp::cli::{
    cmd_gansim, cmd_micalc, cmd_probe_sweep, cmd_signal_surface, cmd_table1, CliError, ConfigFile,
    MicalcOp, Result, RunStatus,
};

/// Feature-competition experiments: exact signal surfaces, two-phase probe
/// sweeps, extractor comparisons, and discrete adversarial simulations.
#[derive(Parser)]
#[command(name = "featcomp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (flat key-value with [sections]); defaults apply if absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run seed; overrides the config's top-level `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSVs and reports.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact learning-signal surface over a corruption grid.
    Surface(RunArgs),
    /// Two-phase probe sweep: train on the left label, probe the right.
    Sweep(RunArgs),
    /// Extractor comparison (supervised/AE/GAN/WGAN vs untrained init).
    Table1(RunArgs),
    /// Discrete adversarial scenario checks and balancing simulation.
    Gansim(RunArgs),
    /// Information measures over a serialized joint distribution.
    Micalc {
        /// Joint distribution file (`vars:` header plus tab-separated cells).
        #[arg(long)]
        pmf: PathBuf,
        #[command(subcommand)]
        op: MicalcCmd,
    },
}

#[derive(Subcommand, Clone)]
enum MicalcCmd {
    /// Entropy of a variable set.
    Entropy {
        /// Comma-separated variable names.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Mutual information between two variable sets.
    Mi {
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<String>,
    },
    /// Conditional mutual information between two sets given a third.
    Cmi {
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Per-feature signal chain for a target given an ordered feature list.
    Signal {
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// Semicolon-separated features, each a comma list of variables.
        #[arg(long)]
        features: String,
    },
}

fn load_config(args: &RunArgs) -> Result<ConfigFile> {
    match &args.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::empty()),
    }
}

fn run() -> Result<RunStatus> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Surface(args) => {
            cmd_signal_surface(&load_config(args)?, args.seed, &args.out_dir)
        }
        Command::Sweep(args) => cmd_probe_sweep(&load_config(args)?, args.seed, &args.out_dir),
        Command::Table1(args) => cmd_table1(&load_config(args)?, args.seed, &args.out_dir),
        Command::Gansim(args) => cmd_gansim(&load_config(args)?, args.seed, &args.out_dir),
        Command::Micalc { pmf, op } => {
            let op = match op.clone() {
                MicalcCmd::Entropy { vars } => MicalcOp::Entropy { vars },
                MicalcCmd::Mi { a, b } => MicalcOp::MutualInformation { a, b },
                MicalcCmd::Cmi { a, b, given } => {
                    MicalcOp::ConditionalMutualInformation { a, b, given }
                }
                MicalcCmd::Signal { y, features } => MicalcOp::SignalSequence {
                    y,
                    features: features
                        .split(';')
                        .map(|f| f.split(',').map(|s| s.trim().to_string()).collect())
                        .collect(),
                },
            };
            cmd_micalc(pmf, &op)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(err @ CliError::Config(_)) => {
            eprintln!("{err}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
