use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BitString, GameError};

/// A partition of players `1..=n` into an ordered list of groups.
///
/// The remaining group of a general-game instance that selects every player
/// is empty, so empty groups are allowed; the union must still cover every
/// player exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    n: usize,
    groups: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self, GameError> {
        if groups.is_empty() {
            return Err(GameError::InvalidGrouping("at least one group is required".into()));
        }
        let mut seen = vec![false; n + 1];
        for group in &groups {
            for &p in group {
                if p == 0 || p > n {
                    return Err(GameError::InvalidGrouping(format!("player {p} outside 1..={n}")));
                }
                if std::mem::replace(&mut seen[p], true) {
                    return Err(GameError::InvalidGrouping(format!("player {p} in two groups")));
                }
            }
        }
        if let Some(missing) = (1..=n).find(|&p| !seen[p]) {
            return Err(GameError::InvalidGrouping(format!("player {missing} in no group")));
        }
        Ok(Self { n, groups })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Group index of every player, indexed by `player - 1`.
    pub fn group_of_players(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (g, members) in self.groups.iter().enumerate() {
            for &p in members {
                out[p - 1] = g;
            }
        }
        out
    }
}

/// The set `W` of allowed final answers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnswerSet {
    /// `k` single bits with odd sum, followed by `ε` for the last group.
    OddParity { k: usize },
    Explicit(Vec<Vec<BitString>>),
}

impl AnswerSet {
    pub fn contains(&self, answers: &[BitString]) -> bool {
        match self {
            AnswerSet::OddParity { k } => {
                if answers.len() != k + 1 || !answers[*k].is_empty() {
                    return false;
                }
                let mut parity = 0;
                for a in &answers[..*k] {
                    match a.as_single_bit() {
                        Some(b) => parity ^= b,
                        None => return false,
                    }
                }
                parity == 1
            }
            AnswerSet::Explicit(allowed) => allowed.iter().any(|w| w.as_slice() == answers),
        }
    }

    /// All allowed tuples in ascending order.
    pub fn enumerate(&self) -> Vec<Vec<BitString>> {
        match self {
            AnswerSet::OddParity { k } => (0u64..1 << k)
                .filter(|bits| bits.count_ones() % 2 == 1)
                .map(|bits| {
                    let mut tuple: Vec<BitString> = (0..*k).map(|i| BitString::bit((bits >> (k - 1 - i) & 1) as u8)).collect();
                    tuple.push(BitString::empty());
                    tuple
                })
                .collect(),
            AnswerSet::Explicit(allowed) => allowed.clone(),
        }
    }
}

/// Side information handed to a group together with its query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuxInfo {
    /// The chosen players (the pair `i, j` or the set `C`).
    Chosen(Vec<usize>),
}

/// One triple `(σ, q, W)` plus the auxiliary input of the remaining group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameInstance {
    grouping: Grouping,
    query: Vec<BitString>,
    answers: AnswerSet,
    aux: Vec<Option<AuxInfo>>,
}

impl GameInstance {
    pub fn new(grouping: Grouping, query: Vec<BitString>, answers: AnswerSet, aux: Vec<Option<AuxInfo>>) -> Result<Self, GameError> {
        let m = grouping.num_groups();
        if query.len() != m {
            return Err(GameError::InvalidGrouping(format!("query has {} entries for {m} groups", query.len())));
        }
        if aux.len() != m {
            return Err(GameError::InvalidGrouping(format!("aux has {} entries for {m} groups", aux.len())));
        }
        Ok(Self { grouping, query, answers, aux })
    }

    /// `σ_C = ({c_1}, …, {c_k}, [n] \ C)` with query `(0, …, 0, 1)` and odd-parity answers.
    pub fn chosen_set(n: usize, chosen: &[usize]) -> Result<Self, GameError> {
        let chosen_set: BTreeSet<usize> = chosen.iter().copied().collect();
        if chosen_set.len() != chosen.len() {
            return Err(GameError::InvalidGrouping("chosen players repeat".into()));
        }
        let mut groups: Vec<Vec<usize>> = chosen.iter().map(|&c| vec![c]).collect();
        groups.push((1..=n).filter(|p| !chosen_set.contains(p)).collect());
        let grouping = Grouping::new(n, groups)?;
        let k = chosen.len();
        let mut query = vec![BitString::bit(0); k];
        query.push(BitString::bit(1));
        let mut aux = vec![None; k];
        aux.push(Some(AuxInfo::Chosen(chosen.to_vec())));
        Self::new(grouping, query, AnswerSet::OddParity { k }, aux)
    }

    pub fn n(&self) -> usize {
        self.grouping.n()
    }

    pub fn grouping(&self) -> &Grouping {
        &self.grouping
    }

    pub fn query(&self) -> &[BitString] {
        &self.query
    }

    pub fn answers(&self) -> &AnswerSet {
        &self.answers
    }

    pub fn aux(&self) -> &[Option<AuxInfo>] {
        &self.aux
    }

    pub fn allowed(&self, outputs: &[BitString]) -> bool {
        self.answers.contains(outputs)
    }

    pub fn has_empty_group(&self) -> bool {
        self.grouping.groups().iter().any(|g| g.is_empty())
    }

    /// Players in one-player groups queried with `0`, in group order.
    pub fn chosen(&self) -> Vec<usize> {
        self.grouping
            .groups()
            .iter()
            .zip(&self.query)
            .filter(|(g, q)| g.len() == 1 && q.as_single_bit() == Some(0))
            .map(|(g, _)| g[0])
            .collect()
    }
}

/// Which game distribution a [`GameSpec`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameKind {
    /// Uniform over all chosen pairs `i < j`.
    SimpleGame,
    /// Uniform over all chosen sets `C` with `|C| ≡ 2 (mod 4)`.
    GeneralGame,
}

/// A uniform game distribution with an exhaustive, rank-addressable support.
///
/// Instances are numbered `0..support_size()`; sampling draws a uniform
/// index, so every sampled instance is one the enumerator yields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    kind: GameKind,
    n: usize,
    /// Set when `n` is below the minimum (5) the simple game is posed for.
    below_minimum: bool,
}

/// Largest player count whose support sizes fit the rank arithmetic.
pub const MAX_PLAYERS: usize = 120;

pub fn make_simple_game(n: usize) -> Result<GameSpec, GameError> {
    if !(3..=MAX_PLAYERS).contains(&n) {
        return Err(GameError::Size { n, min: 3, max: MAX_PLAYERS });
    }
    Ok(GameSpec { kind: GameKind::SimpleGame, n, below_minimum: n < 5 })
}

pub fn make_general_game(n: usize) -> Result<GameSpec, GameError> {
    if !(2..=MAX_PLAYERS).contains(&n) {
        return Err(GameError::Size { n, min: 2, max: MAX_PLAYERS });
    }
    Ok(GameSpec { kind: GameKind::GeneralGame, n, below_minimum: false })
}

impl GameSpec {
    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn below_minimum(&self) -> bool {
        self.below_minimum
    }

    /// Sizes of the chosen sets in the support, ascending.
    pub fn chosen_sizes(&self) -> Vec<usize> {
        match self.kind {
            GameKind::SimpleGame => vec![2],
            GameKind::GeneralGame => (2..=self.n).step_by(4).collect(),
        }
    }

    pub fn support_size(&self) -> u128 {
        self.chosen_sizes().into_iter().map(|k| binomial(self.n, k)).sum()
    }

    /// The chosen players of the instance with the given rank. Ranks run over
    /// sizes in ascending order, then lexicographically within a size.
    pub fn chosen_at(&self, mut rank: u128) -> Option<Vec<usize>> {
        for k in self.chosen_sizes() {
            let count = binomial(self.n, k);
            if rank < count {
                return Some(unrank_combination(self.n, k, rank));
            }
            rank -= count;
        }
        None
    }

    pub fn instance(&self, rank: u128) -> Result<GameInstance, GameError> {
        let chosen = self
            .chosen_at(rank)
            .ok_or_else(|| GameError::Argument(format!("instance rank {rank} outside the support")))?;
        GameInstance::chosen_set(self.n, &chosen)
    }

    pub fn instances(&self) -> impl Iterator<Item = GameInstance> + '_ {
        (0..self.support_size()).map(move |r| self.instance(r).expect("rank within support"))
    }

    pub fn sample_rank<R: Rng + ?Sized>(&self, rng: &mut R) -> u128 {
        rng.gen_range(0..self.support_size())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GameInstance {
        let rank = self.sample_rank(rng);
        self.instance(rank).expect("sampled rank within support")
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `rank`-th `k`-subset of `1..=n` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 1;
    for remaining in (1..=k).rev() {
        loop {
            // subsets starting with `next` at this position
            let count = binomial(n - next, remaining - 1);
            if rank < count {
                out.push(next);
                next += 1;
                break;
            }
            rank -= count;
            next += 1;
        }
    }
    out
}
