//! `dlcz`: command-line front end for the DLCZ source and repeater models.

mod cmd;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmd::Ctx;
use config::RunConfig;
use error::CliError;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "dlcz", version, about = "DLCZ source, Bell and repeater-rate calculations")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for the Monte Carlo.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    Efficiency(cmd::efficiency::Args),
    Bell(cmd::bell::Args),
    Repeater(cmd::repeater::Args),
    Calibrate(cmd::calibrate::Args),
    Simulate(cmd::simulate::Args),
}

fn context(cli: &Cli) -> Result<Ctx, CliError> {
    let (cfg, base) = match &cli.config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        ),
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    let settings = cfg.resolve(&base)?;
    Ok(Ctx {
        out: cli.out.clone().or_else(|| settings.out.clone()),
        format: cli.format.or(settings.format),
        seed: cli.seed.unwrap_or(settings.seed),
        settings,
    })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Efficiency(a) => cmd::efficiency::run(&ctx, a),
        Command::Bell(a) => cmd::bell::run(&ctx, a),
        Command::Repeater(a) => cmd::repeater::run(&ctx, a),
        Command::Calibrate(a) => cmd::calibrate::run(&ctx, a),
        Command::Simulate(a) => cmd::simulate::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlcz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
