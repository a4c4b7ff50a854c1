//! Concrete strategies for both games and the closed-form classical losing
//! probability.

mod classical;
mod label;
mod quantum;

pub use classical::{
    best_response_hint, classical_atom_strategy_assignment, losing_probability_formula, ClassicalAtomStrategy, MixedAssignment,
    StrategyAssignment,
};
pub use label::{classical_label_strategy, LabelTable};
pub use quantum::{
    chosen_basis, ghz_hint_branches, ghz_output_distribution, quantum_general_strategy, quantum_simple_strategy, HintBranch,
    EMPTY_GROUP_HINT,
};

pub use crate::games::QuantumSharedState;

use crate::games::{AuxInfo, GameError, GameKind, StepInput, Strategy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("player count {n} below the minimum {min}")]
    Domain { n: usize, min: usize },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Builds a strategy from its command-line name: `quantum-simple`,
/// `quantum-general`, `classical-label` or `classical-atoms:<atoms>`.
pub fn strategy_by_name(name: &str, n: usize) -> Result<Box<dyn Strategy>, StrategyError> {
    match name {
        "quantum-simple" => quantum_simple_strategy(n),
        "quantum-general" => quantum_general_strategy(n),
        "classical-label" => classical_label_strategy(n),
        "classical-atoms:balanced" => Ok(classical_atom_strategy_assignment(StrategyAssignment::balanced(n)?)),
        _ => {
            let Some(atoms) = name.strip_prefix("classical-atoms:") else {
                return Err(StrategyError::Parse(format!("unknown strategy {name:?}")));
            };
            let atoms = StrategyAssignment::parse_atoms(atoms)?;
            if atoms.len() != n {
                return Err(StrategyError::Parse(format!("{} atoms given for {n} players", atoms.len())));
            }
            Ok(classical_atom_strategy_assignment(StrategyAssignment::best_response(atoms)?))
        }
    }
}

/// The natural quantum strategy for a game.
pub fn quantum_strategy_for(kind: GameKind, n: usize) -> Result<Box<dyn Strategy>, StrategyError> {
    match kind {
        GameKind::SimpleGame => quantum_simple_strategy(n),
        GameKind::GeneralGame => quantum_general_strategy(n),
    }
}

fn chosen_from_aux(input: &StepInput<'_>) -> Result<Vec<usize>, GameError> {
    match input.aux {
        Some(AuxInfo::Chosen(c)) => Ok(c.clone()),
        None => Err(GameError::Protocol("remaining player received no chosen set".into())),
    }
}

/// Players outside `chosen`, ascending.
pub(crate) fn remaining_players(n: usize, chosen: &[usize]) -> Vec<usize> {
    (1..=n).filter(|p| !chosen.contains(p)).collect()
}

/// Lowest-index remaining player, who speaks for the remaining group.
pub(crate) fn leader_of_remaining(n: usize, chosen: &[usize]) -> Option<usize> {
    (1..=n).find(|p| !chosen.contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{make_simple_game, run_game, GameInstance};
    use rand::SeedableRng;

    #[test]
    fn names_resolve() {
        for name in ["quantum-simple", "quantum-general", "classical-label", "classical-atoms:01cf0", "classical-atoms:balanced"] {
            assert!(strategy_by_name(name, 5).is_ok(), "{name}");
        }
        assert!(strategy_by_name("classical-atoms:01", 5).is_err());
        assert!(strategy_by_name("telepathy", 5).is_err());
    }

    #[test]
    fn atom_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let instance = GameInstance::chosen_set(5, &[1, 2]).unwrap();
        for (atoms, won) in [("01ccc", true), ("cc000", false), ("cf000", true)] {
            let s = strategy_by_name(&format!("classical-atoms:{atoms}"), 5).unwrap();
            let r = run_game(&instance, s.as_ref(), &mut rng).unwrap();
            assert_eq!(r.won, won, "{atoms}");
            assert_eq!(r.broadcast_bits, 1);
        }
    }

    #[test]
    fn balanced_atoms_lose_exactly_same_class_pairs() {
        let spec = make_simple_game(6).unwrap();
        let s = strategy_by_name("classical-atoms:balanced", 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let lost = spec.instances().filter(|i| !run_game(i, s.as_ref(), &mut rng).unwrap().won).count();
        // classes {1,5}, {2,6}
        assert_eq!(lost, 2);
    }
}
