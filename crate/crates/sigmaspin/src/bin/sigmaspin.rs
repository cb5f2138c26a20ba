use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use sigmaspin::config::load_config;
use sigmaspin::report::{all_pass, summary, ReportRecord};
use sigmaspin::runner::{self, RunOptions};

#[derive(Parser)]
#[command(name = "sigmaspin", version, about = "Scenario runner for the discrete sigma model with gravitino")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and tables/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Record wall time per check (makes reports run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every listed check at the configured grid size.
    Verify {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Lowest eigenvalues of the squared Dirac operator.
    Spectrum {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the ψ equation and run gradient flows.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Refinement study with fitted convergence orders.
    Convergence {
        config: PathBuf,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        grids: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize an existing report directory.
    Report { dir: PathBuf },
}

fn opts(c: &Common) -> RunOptions {
    RunOptions { workers: c.workers, seed: c.seed, out: c.out.clone(), timing: c.timing }
}

fn run(cli: Cli) -> sigmaspin::Result<Vec<ReportRecord>> {
    match cli.cmd {
        Cmd::Verify { config, common } => runner::verify(&load_config(&config)?, &opts(&common)),
        Cmd::Spectrum { config, common } => runner::spectrum(&load_config(&config)?, &opts(&common)),
        Cmd::Solve { config, common } => runner::solve(&load_config(&config)?, &opts(&common)),
        Cmd::Convergence { config, grids, common } => {
            runner::validate_grids(&grids)?;
            runner::convergence(&load_config(&config)?, &grids, &opts(&common))
        }
        Cmd::Report { dir } => runner::load_report(&dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(records) => {
            print!("{}", summary(&records));
            if all_pass(&records) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
