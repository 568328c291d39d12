use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ifslab::config::load_config;
use ifslab::runner::{self, Format, Subcommand};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Validate,
    Simulate,
    Stationary,
    Dual,
    Eprop,
    Sync,
    Stability,
    Unique,
    Mw,
    Clt,
    Couple,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

/// Random circle homeomorphism laboratory.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Worker threads; defaults to all cores. Outputs do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub: Subcommand = cli.command.to_possible_value().expect("no skipped variants").get_name().parse().expect("names match");
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let result = load_config(&cli.config).and_then(|spec| runner::run_with_workers(sub, &spec, &cli.out, format, cli.seed, cli.workers));
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            for msg in &outcome.failures {
                eprintln!("verdict failed: {msg}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.remediation() {
                eprintln!("hint: {hint}");
            }
        }
    }
    ExitCode::from(runner::exit_code(&result) as u8)
}
