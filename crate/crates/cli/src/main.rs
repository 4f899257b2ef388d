use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use abel_tv_cli::{phantom_field, run_experiment, verify_bounds, ExperimentConfig};

#[derive(Parser)]
#[command(version, about = "TV-regularized Abel inversion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write results under its output_dir.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the one-dimensional stability inequalities on random profiles.
    VerifyBounds {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Rasterize a phantom to CSV.
    Phantom {
        /// Built-in name or path to a JSON shape list.
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 128)]
        grid_n: usize,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let out = run_experiment(&cfg)?;
            print!("{}", out.results_csv());
            eprintln!("wrote {}", cfg.output_dir.display());
            Ok(out.all_ok())
        }
        Command::VerifyBounds { trials, seed } => {
            let (report, text) = verify_bounds(seed, trials)?;
            print!("{text}");
            Ok(report.passed())
        }
        Command::Phantom { name, out, grid_n } => {
            let u = phantom_field(&name, grid_n)?;
            std::fs::write(&out, u.to_csv())
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
    }
}
