//! Experiment runner behind the command-line tool: seeded play, exhaustive
//! verification, formula tables and direct access to the GF(2) searches.

mod commands;
mod report;

pub use commands::{cmd_lemma, cmd_play, cmd_table, cmd_verify, run};
pub use report::{format_rational, format_sig12, Cell, Check, CheckStatus, Report, Table};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::bounds::BoundsError;
use crate::games::{make_general_game, make_simple_game, GameError, GameSpec};
use crate::strategies::StrategyError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N: usize = 5;
pub const DEFAULT_TRIALS: u64 = 10_000;
/// Upper end of the formula table when none is given.
pub const DEFAULT_TABLE_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Play,
    Verify,
    Table,
    Lemma,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Play => "play",
            Command::Verify => "verify",
            Command::Table => "table",
            Command::Lemma => "lemma",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GameChoice {
    #[default]
    Simple,
    General,
}

impl GameChoice {
    pub fn name(self) -> &'static str {
        match self {
            GameChoice::Simple => "simple",
            GameChoice::General => "general",
        }
    }

    pub fn spec(self, n: usize) -> Result<GameSpec, GameError> {
        match self {
            GameChoice::Simple => make_simple_game(n),
            GameChoice::General => make_general_game(n),
        }
    }

    pub fn default_strategy(self) -> &'static str {
        match self {
            GameChoice::Simple => "quantum-simple",
            GameChoice::General => "quantum-general",
        }
    }
}

impl FromStr for GameChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(GameChoice::Simple),
            "general" => Ok(GameChoice::General),
            _ => Err(HarnessError::Usage(format!("unknown game {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            _ => Err(HarnessError::Usage(format!("unknown format {s:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub game: GameChoice,
    /// Player count; for `table`, the last row.
    pub n: Option<usize>,
    /// First row of `table`.
    pub n_min: Option<usize>,
    pub strategy: Option<String>,
    pub trials: u64,
    /// `play` over every instance and measurement branch instead of sampling.
    pub exhaustive: bool,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub max_l: Option<usize>,
    pub family_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            game: GameChoice::Simple,
            n: None,
            n_min: None,
            strategy: None,
            trials: DEFAULT_TRIALS,
            exhaustive: false,
            seed: DEFAULT_SEED,
            output_format: OutputFormat::Text,
            output_path: None,
            max_l: None,
            family_path: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn n_or_default(&self) -> usize {
        self.n.unwrap_or(match self.command {
            Command::Table => DEFAULT_TABLE_MAX,
            _ => DEFAULT_N,
        })
    }

    pub fn strategy_name(&self) -> String {
        self.strategy.clone().unwrap_or_else(|| self.game.default_strategy().to_string())
    }

    /// The configuration as it appears in reports. The output path is left
    /// out so that reports written to different files stay identical.
    pub fn echo(&self) -> Value {
        let mut v = json!({
            "command": self.command.name(),
            "game": self.game.name(),
            "n": self.n_or_default(),
        });
        let obj = v.as_object_mut().expect("object literal");
        match self.command {
            Command::Play => {
                obj.insert("strategy".into(), json!(self.strategy_name()));
                obj.insert("mode".into(), json!(if self.exhaustive { "exhaustive" } else { "sampled" }));
                if !self.exhaustive {
                    obj.insert("trials".into(), json!(self.trials));
                }
            }
            Command::Table => {
                obj.insert("n_min".into(), json!(self.n_min.unwrap_or(5)));
            }
            Command::Lemma => {
                if let Some(l) = self.max_l {
                    obj.insert("max_l".into(), json!(l));
                }
                if let Some(p) = &self.family_path {
                    obj.insert("family".into(), json!(p.display().to_string()));
                }
            }
            Command::Verify => {}
        }
        obj.insert("seed".into(), json!(self.seed));
        obj.insert("format".into(), json!(self.output_format.name()));
        v
    }
}

/// Caps rayon's global pool at `NLGAME_WORKERS` threads when set. Call once
/// before any parallel work.
pub fn configure_workers() -> Result<Option<usize>, HarnessError> {
    let Ok(raw) = std::env::var("NLGAME_WORKERS") else {
        return Ok(None);
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w >= 1)
        .ok_or_else(|| HarnessError::Usage(format!("NLGAME_WORKERS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    Ok(Some(workers))
}
