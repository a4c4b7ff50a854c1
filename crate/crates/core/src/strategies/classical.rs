use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{leader_of_remaining, remaining_players, StrategyError};
use crate::games::{Action, BitString, Framing, GameError, LocalLab, Player, StepInput, Strategy};
use crate::Rational;

/// The four deterministic one-bit behaviors of a chosen player who sees a
/// single hint bit `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassicalAtomStrategy {
    Const0,
    Const1,
    CopyHint,
    FlipHint,
}

impl ClassicalAtomStrategy {
    pub const ALL: [ClassicalAtomStrategy; 4] = [Self::Const0, Self::Const1, Self::CopyHint, Self::FlipHint];

    pub fn output(self, hint: u8) -> u8 {
        match self {
            Self::Const0 => 0,
            Self::Const1 => 1,
            Self::CopyHint => hint & 1,
            Self::FlipHint => 1 - (hint & 1),
        }
    }

    /// Short tag used in assignment strings.
    pub fn tag(self) -> char {
        match self {
            Self::Const0 => '0',
            Self::Const1 => '1',
            Self::CopyHint => 'c',
            Self::FlipHint => 'f',
        }
    }

    pub fn from_tag(c: char) -> Option<Self> {
        match c {
            '0' => Some(Self::Const0),
            '1' => Some(Self::Const1),
            'c' | 'C' => Some(Self::CopyHint),
            'f' | 'F' => Some(Self::FlipHint),
            _ => None,
        }
    }
}

impl fmt::Display for ClassicalAtomStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Const0 => "const0",
            Self::Const1 => "const1",
            Self::CopyHint => "copy",
            Self::FlipHint => "flip",
        })
    }
}

impl FromStr for ClassicalAtomStrategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "const0" | "zero" | "0" => Ok(Self::Const0),
            "const1" | "one" | "1" => Ok(Self::Const1),
            "copy" | "copyhint" | "b" | "c" => Ok(Self::CopyHint),
            "flip" | "fliphint" | "notb" | "f" => Ok(Self::FlipHint),
            _ => Err(StrategyError::Parse(format!("unknown atom {s:?}"))),
        }
    }
}

/// Whether the pair wins with hint `b`.
fn pair_wins(a: ClassicalAtomStrategy, b: ClassicalAtomStrategy, hint: u8) -> bool {
    a.output(hint) != b.output(hint)
}

/// Hint minimizing the loss of a pair, 0 on ties.
pub fn best_response_hint(a: ClassicalAtomStrategy, b: ClassicalAtomStrategy) -> u8 {
    if !pair_wins(a, b, 0) && pair_wins(a, b, 1) {
        1
    } else {
        0
    }
}

/// A deterministic classical strategy for the pair game: one atom per player
/// and the hint the remaining group broadcasts for every chosen pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyAssignment {
    atoms: Vec<ClassicalAtomStrategy>,
    /// Keyed by the chosen pair `(i, j)`, `i < j`.
    hints: BTreeMap<(usize, usize), u8>,
}

impl StrategyAssignment {
    pub fn new(atoms: Vec<ClassicalAtomStrategy>, hints: BTreeMap<(usize, usize), u8>) -> Result<Self, StrategyError> {
        let n = atoms.len();
        if n < 2 {
            return Err(StrategyError::Domain { n, min: 2 });
        }
        for i in 1..=n {
            for j in i + 1..=n {
                match hints.get(&(i, j)) {
                    Some(0 | 1) => {}
                    Some(b) => return Err(StrategyError::Parse(format!("hint {b} for pair ({i}, {j}) is not a bit"))),
                    None => return Err(StrategyError::Parse(format!("no hint for pair ({i}, {j})"))),
                }
            }
        }
        if let Some((i, j)) = hints.keys().find(|(i, j)| !(1 <= *i && i < j && *j <= n)) {
            return Err(StrategyError::Parse(format!("hint for invalid pair ({i}, {j})")));
        }
        Ok(Self { atoms, hints })
    }

    /// Atoms with the best-response hint for every pair.
    pub fn best_response(atoms: Vec<ClassicalAtomStrategy>) -> Result<Self, StrategyError> {
        let n = atoms.len();
        let mut hints = BTreeMap::new();
        for i in 1..=n {
            for j in i + 1..=n {
                hints.insert((i, j), best_response_hint(atoms[i - 1], atoms[j - 1]));
            }
        }
        Self::new(atoms, hints)
    }

    /// Player `i` gets atom `(i - 1) mod 4`, so class sizes differ by at most one.
    pub fn balanced(n: usize) -> Result<Self, StrategyError> {
        Self::best_response((0..n).map(|i| ClassicalAtomStrategy::ALL[i % 4]).collect())
    }

    /// Parses `0fc1…` (one tag per player) or a comma-separated list of names.
    pub fn parse_atoms(spec: &str) -> Result<Vec<ClassicalAtomStrategy>, StrategyError> {
        if spec.contains(',') {
            spec.split(',').map(str::parse).collect()
        } else {
            spec.chars()
                .map(|c| ClassicalAtomStrategy::from_tag(c).ok_or_else(|| StrategyError::Parse(format!("unknown atom tag {c:?}"))))
                .collect()
        }
    }

    pub fn n(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[ClassicalAtomStrategy] {
        &self.atoms
    }

    pub fn hint(&self, i: usize, j: usize) -> Option<u8> {
        self.hints.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn atom_string(&self) -> String {
        self.atoms.iter().map(|a| a.tag()).collect()
    }

    /// Number of chosen pairs the assignment loses.
    pub fn losing_pairs(&self) -> u64 {
        self.hints
            .iter()
            .filter(|(&(i, j), &b)| !pair_wins(self.atoms[i - 1], self.atoms[j - 1], b))
            .count() as u64
    }

    /// Exact losing probability under the uniform pair distribution.
    pub fn losing_probability(&self) -> Rational {
        Rational::new(self.losing_pairs() as i128, self.hints.len() as i128)
    }
}

/// Shared randomness fixed before the game: a distribution over
/// deterministic assignments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedAssignment {
    components: Vec<(Rational, StrategyAssignment)>,
}

impl MixedAssignment {
    pub fn new(components: Vec<(Rational, StrategyAssignment)>) -> Result<Self, StrategyError> {
        let zero = Rational::from_integer(0);
        if components.is_empty() || components.iter().any(|(w, _)| *w < zero) {
            return Err(StrategyError::Parse("weights must be non-negative and non-empty".into()));
        }
        let total: Rational = components.iter().map(|(w, _)| *w).sum();
        if total != Rational::from_integer(1) {
            return Err(StrategyError::Parse(format!("weights sum to {total}, not 1")));
        }
        let n = components[0].1.n();
        if components.iter().any(|(_, a)| a.n() != n) {
            return Err(StrategyError::Parse("components disagree on the player count".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(Rational, StrategyAssignment)] {
        &self.components
    }

    pub fn average_loss(&self) -> Rational {
        self.components.iter().map(|(w, a)| *w * a.losing_probability()).sum()
    }

    /// Largest losing probability among components with positive weight.
    pub fn worst_loss(&self) -> Rational {
        let zero = Rational::from_integer(0);
        self.components
            .iter()
            .filter(|(w, _)| *w > zero)
            .map(|(_, a)| a.losing_probability())
            .max()
            .unwrap_or(zero)
    }
}

/// `p(n)`, the smallest classical losing probability with one hint bit.
///
/// With `n = 4k + r`, the four atom classes hold `k` or `k + 1` players and a
/// loss happens exactly when both chosen players share a class.
pub fn losing_probability_formula(n: usize) -> Result<Rational, StrategyError> {
    if n < 5 {
        return Err(StrategyError::Domain { n, min: 5 });
    }
    let (k, r) = ((n / 4) as i128, (n % 4) as i128);
    let n = n as i128;
    let small = Rational::from_integer(4 - r) * Rational::new(k, n) * Rational::new(k - 1, n - 1);
    let large = Rational::from_integer(r) * Rational::new(k + 1, n) * Rational::new(k, n - 1);
    Ok(small + large)
}

/// The remaining group broadcasts the hint for the chosen pair in step 1;
/// chosen players apply their atom in step 2.
struct AtomStrategy {
    assignment: StrategyAssignment,
}

pub fn classical_atom_strategy_assignment(assignment: StrategyAssignment) -> Box<dyn Strategy> {
    Box::new(AtomStrategy { assignment })
}

impl Strategy for AtomStrategy {
    fn name(&self) -> String {
        format!("classical-atoms:{}", self.assignment.atom_string())
    }

    fn num_players(&self) -> usize {
        self.assignment.n()
    }

    fn player(&self, index: usize) -> Box<dyn Player> {
        Box::new(AtomPlayer { index, assignment: self.assignment.clone(), chosen: false })
    }

    fn framing(&self, step: usize) -> Framing {
        Framing::Fixed(if step == 1 { 1 } else { 0 })
    }
}

struct AtomPlayer {
    index: usize,
    assignment: StrategyAssignment,
    chosen: bool,
}

impl Player for AtomPlayer {
    fn step(&mut self, input: &StepInput<'_>, _lab: &mut LocalLab<'_>) -> Result<Action, GameError> {
        match input.step {
            1 if input.query.and_then(BitString::as_single_bit) == Some(0) => {
                self.chosen = true;
                Ok(Action::wait())
            }
            1 => {
                let chosen = super::chosen_from_aux(input)?;
                if leader_of_remaining(self.assignment.n(), &chosen) != Some(self.index) {
                    return Ok(Action::halt());
                }
                let [i, j] = chosen[..] else {
                    return Err(GameError::Protocol(format!("atom assignment has no hint for chosen set {chosen:?}")));
                };
                let hint = self
                    .assignment
                    .hint(i, j)
                    .ok_or_else(|| GameError::Protocol(format!("no hint for pair ({i}, {j})")))?;
                debug_assert!(remaining_players(self.assignment.n(), &chosen).contains(&self.index));
                Ok(Action::broadcast(BitString::bit(hint)).and_halt())
            }
            _ if self.chosen => {
                let hint = input.broadcast.as_single_bit().unwrap_or(0);
                let atom = self.assignment.atoms()[self.index - 1];
                Ok(Action::output(BitString::bit(atom.output(hint))).and_halt())
            }
            _ => Ok(Action::halt()),
        }
    }
}
