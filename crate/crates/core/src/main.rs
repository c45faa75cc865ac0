//! `cifar-ensemble` — reproducible classical baselines and expert fusion
//! for CIFAR-10-format data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cifar_ensemble::cli;

#[derive(Parser)]
#[command(
    name = "cifar-ensemble",
    version,
    about = "Classical CIFAR-10 baselines (PCA + KNN / logistic regression) and \
             exhaustive-search weighted fusion of expert score files",
    after_help = "Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure."
)]
struct Args {
    /// TOML configuration file; omitted fields take documented defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory with the CIFAR-10 binary batches (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    data_dir: Option<PathBuf>,

    /// Output directory for reports and artifacts (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accuracy sweep: logistic regression and KNN over PCA component counts.
    Table1,
    /// Search fusion weights over expert score files and report the fusion.
    Ensemble {
        /// Search weights on all labeled rows instead of a held-out split
        /// (optimistically biased; a warning is printed).
        #[arg(long)]
        search_on_test: bool,
    },
    /// Export KNN test scores in the expert interchange format.
    ExportKnn,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config =
        match cli::resolve_config(args.config.as_deref(), args.data_dir, args.out, args.seed) {
            Ok(config) => config,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(err.exit_code() as u8);
            }
        };
    let result = match args.command {
        Command::Table1 => cli::cmd_table1(&config),
        Command::Ensemble { search_on_test } => cli::cmd_ensemble(&config, search_on_test),
        Command::ExportKnn => cli::cmd_export_knn(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
