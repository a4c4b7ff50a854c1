use serde::{Deserialize, Serialize};

use super::{chosen_from_aux, leader_of_remaining, StrategyError};
use crate::games::{ceil_log2, Action, BitString, Framing, GameError, LocalLab, Player, StepInput, Strategy};

/// Distinct fixed-length labels `m_1, …, m_n`; `m_i` is `i - 1` in binary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTable {
    labels: Vec<BitString>,
}

impl LabelTable {
    pub fn binary(n: usize) -> Result<Self, StrategyError> {
        if n < 2 {
            return Err(StrategyError::Domain { n, min: 2 });
        }
        let width = ceil_log2(n);
        Ok(Self { labels: (0..n).map(|i| BitString::from_uint(i as u64, width)).collect() })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.labels[0].len()
    }

    /// Label of player `i` (1-based).
    pub fn label(&self, i: usize) -> &BitString {
        &self.labels[i - 1]
    }

    pub fn labels(&self) -> &[BitString] {
        &self.labels
    }
}

/// The remaining group broadcasts the label of the lowest chosen player;
/// each chosen player outputs 1 iff the broadcast is its own label.
struct LabelStrategy {
    table: LabelTable,
}

pub fn classical_label_strategy(n: usize) -> Result<Box<dyn Strategy>, StrategyError> {
    Ok(Box::new(LabelStrategy { table: LabelTable::binary(n)? }))
}

impl Strategy for LabelStrategy {
    fn name(&self) -> String {
        "classical-label".into()
    }

    fn num_players(&self) -> usize {
        self.table.n()
    }

    fn player(&self, index: usize) -> Box<dyn Player> {
        Box::new(LabelPlayer { index, table: self.table.clone(), chosen: false })
    }

    fn framing(&self, step: usize) -> Framing {
        Framing::Fixed(if step == 1 { self.table.width() } else { 0 })
    }

    fn empty_group_fallback(&self, step: usize) -> Option<BitString> {
        (step == 1).then(|| self.table.label(1).clone())
    }
}

struct LabelPlayer {
    index: usize,
    table: LabelTable,
    chosen: bool,
}

impl Player for LabelPlayer {
    fn step(&mut self, input: &StepInput<'_>, _lab: &mut LocalLab<'_>) -> Result<Action, GameError> {
        match input.step {
            1 if input.query.and_then(BitString::as_single_bit) == Some(0) => {
                self.chosen = true;
                Ok(Action::wait())
            }
            1 => {
                let chosen = chosen_from_aux(input)?;
                if leader_of_remaining(self.table.n(), &chosen) != Some(self.index) {
                    return Ok(Action::halt());
                }
                let s = *chosen.iter().min().ok_or_else(|| GameError::Protocol("no chosen players".into()))?;
                Ok(Action::broadcast(self.table.label(s).clone()).and_halt())
            }
            _ if self.chosen => {
                let bit = u8::from(input.broadcast == self.table.label(self.index));
                Ok(Action::output(BitString::bit(bit)).and_halt())
            }
            _ => Ok(Action::halt()),
        }
    }
}
