//! The GHZ hint strategy shared by both games.
//!
//! The remaining players measure in the diagonal basis and the parity `b` of
//! their outcomes is broadcast as a single bit. The chosen players' qubits
//! are then in `(|0…0⟩ + (-1)^b |1…1⟩)/√2`; they measure in the diagonal basis
//! if `b = 1`, in the circular basis if `b = 0`, and output the outcome.

use serde::{Deserialize, Serialize};

use super::{chosen_from_aux, leader_of_remaining, remaining_players, StrategyError};
use crate::games::{
    Action, BitString, Framing, GameError, GameKind, LocalLab, Player, QuantumSharedState, StepInput, Strategy,
};
use crate::qsim::{make_ghz, MeasBasis, StateVector};
use crate::Rational;

/// Basis the chosen players measure in after hint `b`.
pub fn chosen_basis(hint: u8) -> MeasBasis {
    if hint == 1 {
        MeasBasis::Diagonal
    } else {
        MeasBasis::Circular
    }
}

/// Hint used when the remaining group is empty.
pub const EMPTY_GROUP_HINT: u8 = 0;

const HINT_STEP: usize = 2;
const OUTPUT_STEP: usize = 3;

struct GhzHintStrategy {
    n: usize,
    kind: GameKind,
    ghz: StateVector,
}

pub fn quantum_simple_strategy(n: usize) -> Result<Box<dyn Strategy>, StrategyError> {
    if n < 3 {
        return Err(StrategyError::Domain { n, min: 3 });
    }
    Ok(Box::new(GhzHintStrategy { n, kind: GameKind::SimpleGame, ghz: make_ghz(n).map_err(GameError::from)? }))
}

pub fn quantum_general_strategy(n: usize) -> Result<Box<dyn Strategy>, StrategyError> {
    if n < 2 {
        return Err(StrategyError::Domain { n, min: 2 });
    }
    Ok(Box::new(GhzHintStrategy { n, kind: GameKind::GeneralGame, ghz: make_ghz(n).map_err(GameError::from)? }))
}

impl Strategy for GhzHintStrategy {
    fn name(&self) -> String {
        match self.kind {
            GameKind::SimpleGame => "quantum-simple".into(),
            GameKind::GeneralGame => "quantum-general".into(),
        }
    }

    fn num_players(&self) -> usize {
        self.n
    }

    fn player(&self, index: usize) -> Box<dyn Player> {
        Box::new(GhzPlayer { index, n: self.n, role: Role::Unknown, own_outcome: 0 })
    }

    fn framing(&self, step: usize) -> Framing {
        Framing::Fixed(if step == HINT_STEP { 1 } else { 0 })
    }

    fn empty_group_fallback(&self, step: usize) -> Option<BitString> {
        (step == HINT_STEP).then(|| BitString::bit(EMPTY_GROUP_HINT))
    }

    fn shared_state(&self) -> Option<QuantumSharedState> {
        Some(QuantumSharedState::one_qubit_each(self.ghz.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Unknown,
    Chosen,
    Leader { expected: usize },
}

struct GhzPlayer {
    index: usize,
    n: usize,
    role: Role,
    own_outcome: u8,
}

impl Player for GhzPlayer {
    fn step(&mut self, input: &StepInput<'_>, lab: &mut LocalLab<'_>) -> Result<Action, GameError> {
        match (input.step, self.role) {
            (1, _) if input.query.and_then(BitString::as_single_bit) == Some(0) => {
                self.role = Role::Chosen;
                Ok(Action::wait())
            }
            (1, _) => {
                let chosen = chosen_from_aux(input)?;
                let outcome = lab.measure(MeasBasis::Diagonal)?;
                if leader_of_remaining(self.n, &chosen) == Some(self.index) {
                    let others = remaining_players(self.n, &chosen).len() - 1;
                    self.role = Role::Leader { expected: others };
                    self.own_outcome = outcome;
                    Ok(Action::wait())
                } else {
                    Ok(Action::group(BitString::bit(outcome)).and_halt())
                }
            }
            (HINT_STEP, Role::Leader { expected }) => {
                if input.group_messages.len() != expected {
                    return Err(GameError::Protocol(format!(
                        "expected {expected} outcome reports, got {}",
                        input.group_messages.len()
                    )));
                }
                let mut parity = self.own_outcome;
                for (_, bits) in input.group_messages {
                    parity ^= bits.as_single_bit().ok_or_else(|| GameError::Protocol("outcome report is not one bit".into()))?;
                }
                Ok(Action::broadcast(BitString::bit(parity)).and_halt())
            }
            (HINT_STEP, Role::Chosen) => Ok(Action::wait()),
            (OUTPUT_STEP, Role::Chosen) => {
                let hint = input
                    .broadcast
                    .as_single_bit()
                    .ok_or_else(|| GameError::Protocol("hint is not a single bit".into()))?;
                let outcome = lab.measure(chosen_basis(hint))?;
                Ok(Action::output(BitString::bit(outcome)).and_halt())
            }
            _ => Err(GameError::Protocol(format!("player {} has nothing to do in step {}", self.index, input.step))),
        }
    }
}

/// One combination of remaining-player outcomes and what follows from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HintBranch {
    /// Diagonal outcomes of the remaining players, in player order.
    pub remaining_outcomes: Vec<u8>,
    pub hint: u8,
    /// Exact probability of the remaining outcomes.
    pub probability: Rational,
    /// Joint probability of these remaining outcomes with every chosen output
    /// tuple, indexed by the tuple read as a binary number (first chosen
    /// player most significant).
    pub joint: Vec<Rational>,
}

impl HintBranch {
    /// Conditional output distribution given this branch.
    pub fn conditional(&self) -> Vec<Rational> {
        self.joint.iter().map(|p| p / self.probability).collect()
    }
}

/// Enumerates every remaining-outcome branch of the GHZ hint strategy on the
/// chosen set and computes the exact joint output probabilities, without
/// sampling.
pub fn ghz_hint_branches(n: usize, chosen: &[usize]) -> Result<Vec<HintBranch>, StrategyError> {
    let ghz = make_ghz(n).map_err(GameError::from)?;
    let remaining = remaining_players(n, chosen);
    let k = chosen.len();
    let mut out = Vec::with_capacity(1 << remaining.len());
    for r_bits in 0u64..1 << remaining.len() {
        let r: Vec<u8> = (0..remaining.len()).map(|t| (r_bits >> (remaining.len() - 1 - t) & 1) as u8).collect();
        let hint = if remaining.is_empty() { EMPTY_GROUP_HINT } else { r.iter().fold(0, |acc, b| acc ^ b) };
        let mut assignment: Vec<(usize, MeasBasis, u8)> = remaining.iter().zip(&r).map(|(&p, &b)| (p, MeasBasis::Diagonal, b)).collect();
        let probability = probability_of(&ghz, &assignment)?;
        let mut joint = Vec::with_capacity(1 << k);
        for o_bits in 0u64..1 << k {
            assignment.truncate(remaining.len());
            for (t, &p) in chosen.iter().enumerate() {
                assignment.push((p, chosen_basis(hint), (o_bits >> (k - 1 - t) & 1) as u8));
            }
            joint.push(probability_of(&ghz, &assignment)?);
        }
        out.push(HintBranch { remaining_outcomes: r, hint, probability, joint });
    }
    Ok(out)
}

fn probability_of(state: &StateVector, assignment: &[(usize, MeasBasis, u8)]) -> Result<Rational, StrategyError> {
    if assignment.is_empty() {
        return Ok(Rational::from_integer(1));
    }
    state.outcome_probability(assignment).map_err(|e| StrategyError::Game(e.into()))
}

/// Exact distribution of the chosen players' output tuple, indexed as in
/// [`HintBranch::joint`].
pub fn ghz_output_distribution(n: usize, chosen: &[usize]) -> Result<Vec<Rational>, StrategyError> {
    let mut total = vec![Rational::from_integer(0); 1 << chosen.len()];
    for branch in ghz_hint_branches(n, chosen)? {
        for (acc, p) in total.iter_mut().zip(&branch.joint) {
            *acc += p;
        }
    }
    Ok(total)
}
