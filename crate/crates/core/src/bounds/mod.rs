//! Exhaustive checks of the classical lower bounds: the best one-hint-bit
//! assignment, the smallest transcript sets for both games, and the GF(2)
//! subset condition with its `√n − 2` bound.

mod assignment;
mod chain;
mod family;
mod search;

pub use assignment::{class_profiles, exhaustive_min_loss, is_balanced, representative, AssignmentSearchResult, ClassProfile};
pub use chain::{
    appendix_bound, meets_appendix_bound, meets_broadcast_bound, meets_pair_bound, response_table, verify_lemma_chain,
    LemmaChainReport,
};
pub use family::{check_gf2_condition, first_zero_subset, GF2Family, ResponseTable, MAX_CHECK_N, MAX_DIMENSION};
pub use search::{
    dimension_search_general, find_family, min_dimension_general, min_transcripts_simple, search_min_dimension,
    transcripts_search_simple, Constraint, DimensionAttempt, SearchOutcome,
};

use crate::games::GameError;
use crate::strategies::StrategyError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("n = {n} outside {min}..={max}")]
    Size { n: usize, min: usize, max: usize },
    #[error("{0}")]
    Parse(String),
    #[error("no winning table for n = {n} with at most {max_l} columns")]
    SearchExhausted { n: usize, max_l: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}
