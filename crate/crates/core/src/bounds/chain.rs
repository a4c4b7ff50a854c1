use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_gf2_condition, min_dimension_general, BoundsError, ResponseTable};
use crate::games::{ceil_log2, make_general_game, replay_chosen_player, run_game_branches, BitString, GameSpec, Strategy};
use crate::strategies::classical_label_strategy;

/// `√n − 2`.
pub fn appendix_bound(n: usize) -> f64 {
    (n as f64).sqrt() - 2.0
}

/// `l ≥ √n − 2`, decided exactly as `l + 2 ≥ 0` and `(l + 2)^2 ≥ n`.
pub fn meets_appendix_bound(l: usize, n: usize) -> bool {
    (l + 2) * (l + 2) >= n
}

/// `log2 l ≥ ½ log2 n − 2`, decided exactly as `16 l^2 ≥ n`.
pub fn meets_broadcast_bound(l: usize, n: usize) -> bool {
    16 * l * l >= n
}

/// `log2 l ≥ log2 log2 n`, decided exactly as `2^l ≥ n`.
pub fn meets_pair_bound(l: usize, n: usize) -> bool {
    l >= usize::BITS as usize || 1usize << l >= n
}

/// Runs a deterministic strategy on every instance, collects the distinct
/// broadcast histories, and reads off each player's output for each of them.
pub fn response_table(spec: &GameSpec, strategy: &dyn Strategy) -> Result<ResponseTable, BoundsError> {
    let mut histories: BTreeSet<Vec<BitString>> = BTreeSet::new();
    for instance in spec.instances() {
        let branches = run_game_branches(&instance, strategy)?;
        if branches.len() != 1 {
            return Err(BoundsError::Parse("response tables need a deterministic strategy".into()));
        }
        let payloads = branches[0].result.transcript.steps.iter().map(|s| s.broadcast.clone()).collect();
        histories.insert(payloads);
    }
    let rows = (1..=spec.n())
        .map(|i| {
            histories
                .iter()
                .map(|h| Ok(replay_chosen_player(strategy, i, h)?.and_then(|b| b.as_single_bit()) == Some(1)))
                .collect::<Result<Vec<bool>, BoundsError>>()
                .map(BitString::from_bits)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ResponseTable::new(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaChainReport {
    pub n: usize,
    /// Smallest dimension found by search.
    pub l_min: usize,
    pub sqrt_n_minus_2: f64,
    pub l_min_meets_sqrt_bound: bool,
    pub log2_l_min: f64,
    pub half_log2_n_minus_2: f64,
    pub broadcast_bound_holds: bool,
    /// Distinct broadcast histories of the label strategy.
    pub label_histories: usize,
    /// The label strategy's response table satisfies the subset condition.
    pub label_table_valid: bool,
    /// `2^⌈log2 n⌉`.
    pub label_upper_bound: usize,
    pub upper_bound_holds: bool,
}

impl LemmaChainReport {
    pub fn all_hold(&self) -> bool {
        self.l_min_meets_sqrt_bound && self.broadcast_bound_holds && self.label_table_valid && self.upper_bound_holds
    }
}

/// Compares the searched minimum dimension with the lower bound and the
/// label strategy's upper bound.
pub fn verify_lemma_chain(n: usize) -> Result<LemmaChainReport, BoundsError> {
    if !(2..=10).contains(&n) {
        return Err(BoundsError::Size { n, min: 2, max: 10 });
    }
    let l_min = min_dimension_general(n)?;
    let spec = make_general_game(n)?;
    let strategy = classical_label_strategy(n)?;
    let table = response_table(&spec, strategy.as_ref())?;
    let label_table_valid = check_gf2_condition(&table.to_family()?)?;
    let label_upper_bound = 1 << ceil_log2(n);
    Ok(LemmaChainReport {
        n,
        l_min,
        sqrt_n_minus_2: appendix_bound(n),
        l_min_meets_sqrt_bound: meets_appendix_bound(l_min, n),
        log2_l_min: (l_min as f64).log2(),
        half_log2_n_minus_2: 0.5 * (n as f64).log2() - 2.0,
        broadcast_bound_holds: meets_broadcast_bound(l_min, n),
        label_histories: table.l(),
        label_table_valid,
        label_upper_bound,
        upper_bound_holds: l_min <= table.l() && table.l() <= label_upper_bound,
    })
}
