use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nlgame_core::harness::{self, Command, ExperimentConfig, GameChoice, OutputFormat};

/// Plays and verifies GHZ pseudo-telepathy games with broadcast accounting.
#[derive(Parser, Debug)]
#[command(name = "nlgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run seeded games and report win rate and broadcast statistics.
    Play(PlayArgs),
    /// Run every exact check available for one player count.
    Verify(CommonArgs),
    /// Tabulate the classical losing probability and the bounds.
    Table(TableArgs),
    /// Check a GF(2) family file, or search for the smallest dimension.
    Lemma(LemmaArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Game::Simple)]
    game: Game,
    /// Number of players.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlayArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// quantum-simple, quantum-general, classical-label or classical-atoms:<atoms>.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS)]
    trials: u64,
    /// Enumerate every instance and measurement branch instead of sampling.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First row (rows start at 5 at the earliest).
    #[arg(long)]
    n_min: Option<usize>,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest dimension to try.
    #[arg(long)]
    max_l: Option<usize>,
    /// Family file: one 0/1 vector per line.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Game {
    Simple,
    General,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn config_from(command: Command, common: CommonArgs) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(command);
    config.game = match common.game {
        Game::Simple => GameChoice::Simple,
        Game::General => GameChoice::General,
    };
    config.n = common.n;
    config.seed = common.seed;
    config.output_format = match common.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
        Format::Text => OutputFormat::Text,
    };
    config.output_path = common.out;
    config
}

fn build_config(cli: Cli) -> ExperimentConfig {
    match cli.command {
        Cmd::Play(a) => {
            let mut c = config_from(Command::Play, a.common);
            c.strategy = a.strategy;
            c.trials = a.trials;
            c.exhaustive = a.exhaustive;
            c
        }
        Cmd::Verify(a) => config_from(Command::Verify, a),
        Cmd::Table(a) => {
            let mut c = config_from(Command::Table, a.common);
            c.n_min = a.n_min;
            c
        }
        Cmd::Lemma(a) => {
            let mut c = config_from(Command::Lemma, a.common);
            c.max_l = a.max_l;
            c.family_path = a.family;
            c
        }
    }
}

fn main() -> ExitCode {
    let config = build_config(Cli::parse());
    match execute(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("nlgame: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed.
fn execute(config: &ExperimentConfig) -> anyhow::Result<bool> {
    harness::configure_workers()?;
    let report = harness::run(config)?;
    let text = report.render(config.output_format)?;
    match &config.output_path {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    for failed in report.failed_checks() {
        eprintln!("check failed: {}: {}", failed.name, failed.detail);
    }
    Ok(report.all_passed())
}
