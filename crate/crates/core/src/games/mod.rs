//! Non-local games with group broadcast: instances, game distributions,
//! message framing and the step-based execution loop.

mod bits;
mod instance;
mod run;
mod transcript;

pub use bits::{ceil_log2, BitString};
pub use instance::{
    binomial, make_general_game, make_simple_game, unrank_combination, AnswerSet, AuxInfo, GameInstance, GameKind, GameSpec,
    Grouping, MAX_PLAYERS,
};
pub use run::{
    broadcast_complexity, replay_chosen_player, run_game, run_game_branches, run_with_source, trial_rng, Action, Branch, ComplexityReport, LocalLab,
    Message, OutcomeSource, Player, QuantumSharedState, RngSource, RunResult, StepInput, Strategy, SweepMode,
    DEFAULT_STEP_LIMIT,
};
pub use transcript::{Framing, MessageRecord, Scope, StepRecord, Transcript};

use crate::qsim::QsimError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("player count {n} outside {min}..={max}")]
    Size { n: usize, min: usize, max: usize },
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("run did not terminate within {limit} steps")]
    NonTermination { limit: usize },
    #[error(transparent)]
    Quantum(#[from] QsimError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("parse error: {0}")]
    Parse(String),
}
