use std::path::PathBuf;
use std::process::ExitCode;

use cggibbs_bench::{execute, Command, ConfigFile};
use clap::Parser;

/// Cached-predictor Gibbs experiments.
#[derive(Debug, Parser)]
#[command(name = "cggibbs", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Key-value config file; see the README for keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set d_grid=16,32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(ConfigFile::default()), ConfigFile::read)
        .and_then(|file| file.params(cli.command.section(), &cli.overrides))
        .and_then(|params| execute(cli.command, &params));
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
