//! Pruned search for the smallest number of broadcast histories that lets a
//! deterministic strategy win every instance.
//!
//! A chosen player's output depends only on the broadcast history it sees, so
//! a strategy reduces to one row of output bits per player, one column per
//! history. The remaining group may pick any history for any instance. The
//! pair game is won on every instance iff every two rows differ in some
//! column; the set game iff every `C` with `|C| ≡ 2 (mod 4)` has a column
//! where the rows of `C` have odd weight, that is, a nonzero GF(2) sum.
//!
//! Players are interchangeable, so rows are searched as a non-decreasing
//! sequence of integers, which visits every multiset of rows once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundsError, GF2Family};
use crate::games::ceil_log2;

/// Which instances the rows must win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// Every pair of players.
    Pairs,
    /// Every subset of size `≡ 2 (mod 4)`.
    TwoModFour,
}

/// Per-dimension search log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionAttempt {
    pub l: usize,
    pub feasible: bool,
    /// Search-tree nodes expanded.
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub n: usize,
    pub constraint: Constraint,
    /// Smallest feasible `l`, if one was found within the limit.
    pub l_min: Option<usize>,
    pub witness: Option<GF2Family>,
    pub attempts: Vec<DimensionAttempt>,
}

/// Search state: the rows placed so far and what a new row must avoid.
#[derive(Clone)]
struct Frontier {
    constraint: Constraint,
    /// `sums[c][x]`: some subset of the placed rows with size `≡ c (mod 4)` sums to `x`.
    sums: [Vec<bool>; 4],
}

impl Frontier {
    fn new(constraint: Constraint, l: usize) -> Self {
        let mut sums: [Vec<bool>; 4] = std::array::from_fn(|_| vec![false; 1 << l]);
        sums[0][0] = true;
        Self { constraint, sums }
    }

    /// A new row `v` closes a losing instance iff some placed subset `S` with
    /// `|S ∪ {v}|` constrained sums to `v`.
    fn allows(&self, v: usize) -> bool {
        !self.sums[1][v]
    }

    fn push(&self, v: usize) -> Self {
        let mut next = self.clone();
        match self.constraint {
            // only single rows matter: sums[1] is the set of placed rows
            Constraint::Pairs => next.sums[1][v] = true,
            Constraint::TwoModFour => {
                for c in 0..4 {
                    let from = &self.sums[(c + 3) % 4];
                    for (x, &present) in from.iter().enumerate() {
                        if present {
                            next.sums[c][x ^ v] = true;
                        }
                    }
                }
            }
        }
        next
    }
}

fn extend(frontier: &Frontier, rows: &mut Vec<u64>, n: usize, l: usize, nodes: &mut u64) -> bool {
    *nodes += 1;
    if rows.len() == n {
        return true;
    }
    let start = rows.last().map(|&r| r as usize).unwrap_or(0);
    for v in start..1 << l {
        if !frontier.allows(v) {
            continue;
        }
        rows.push(v as u64);
        if extend(&frontier.push(v), rows, n, l, nodes) {
            return true;
        }
        rows.pop();
    }
    false
}

/// Rows of a winning table with `l` columns, if one exists. The first row is
/// fixed per worker; the lowest feasible first row wins.
pub fn find_family(n: usize, l: usize, constraint: Constraint) -> (Option<GF2Family>, u64) {
    if n == 0 {
        return (GF2Family::new(l, Vec::new()).ok(), 1);
    }
    let results: Vec<(Option<Vec<u64>>, u64)> = (0..1usize << l)
        .into_par_iter()
        .map(|first| {
            let mut nodes = 0;
            let frontier = Frontier::new(constraint, l).push(first);
            let mut rows = vec![first as u64];
            let found = extend(&frontier, &mut rows, n, l, &mut nodes);
            (found.then_some(rows), nodes)
        })
        .collect();
    let nodes = results.iter().map(|r| r.1).sum();
    let rows = results.into_iter().find_map(|r| r.0);
    (rows.map(|r| GF2Family::new(l, r).expect("rows fit the dimension")), nodes)
}

/// Smallest `l ≤ max_l` admitting a winning table.
pub fn search_min_dimension(n: usize, constraint: Constraint, max_l: usize) -> SearchOutcome {
    let mut attempts = Vec::new();
    for l in 1..=max_l {
        let (witness, nodes) = find_family(n, l, constraint);
        attempts.push(DimensionAttempt { l, feasible: witness.is_some(), nodes });
        if witness.is_some() {
            return SearchOutcome { n, constraint, l_min: Some(l), witness, attempts };
        }
    }
    SearchOutcome { n, constraint, l_min: None, witness: None, attempts }
}

fn checked_search(n: usize, constraint: Constraint, min: usize, max: usize) -> Result<SearchOutcome, BoundsError> {
    if !(min..=max).contains(&n) {
        return Err(BoundsError::Size { n, min, max });
    }
    // n distinct rows always fit in ⌈log2 n⌉ + 1 columns for both constraints
    let limit = ceil_log2(n) + 2;
    let outcome = search_min_dimension(n, constraint, limit);
    if outcome.l_min.is_none() {
        return Err(BoundsError::SearchExhausted { n, max_l: limit });
    }
    Ok(outcome)
}

/// Full search log for the pair game.
pub fn transcripts_search_simple(n: usize) -> Result<SearchOutcome, BoundsError> {
    checked_search(n, Constraint::Pairs, 2, 16)
}

/// Fewest broadcast histories that let a deterministic strategy win every
/// instance of the pair game.
pub fn min_transcripts_simple(n: usize) -> Result<usize, BoundsError> {
    Ok(transcripts_search_simple(n)?.l_min.expect("checked"))
}

/// Full search log for the set game.
pub fn dimension_search_general(n: usize) -> Result<SearchOutcome, BoundsError> {
    checked_search(n, Constraint::TwoModFour, 2, 10)
}

/// Smallest dimension of a family of `n` vectors over GF(2) in which every
/// subset of size `≡ 2 (mod 4)` has a nonzero sum.
pub fn min_dimension_general(n: usize) -> Result<usize, BoundsError> {
    Ok(dimension_search_general(n)?.l_min.expect("checked"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::check_gf2_condition;

    #[test]
    fn pair_search_small() {
        assert_eq!(min_transcripts_simple(2).unwrap(), 1);
        assert_eq!(min_transcripts_simple(5).unwrap(), 3);
        let (none, nodes) = find_family(5, 2, Constraint::Pairs);
        assert!(none.is_none());
        assert!(nodes > 4);
        assert!(min_transcripts_simple(1).is_err());
        assert!(min_transcripts_simple(17).is_err());
    }

    #[test]
    fn general_search_small() {
        assert_eq!(min_dimension_general(2).unwrap(), 1);
        assert_eq!(min_dimension_general(5).unwrap(), 3);
        assert_eq!(min_dimension_general(6).unwrap(), 3);
        assert!(find_family(6, 2, Constraint::TwoModFour).0.is_none());
        assert!(min_dimension_general(11).is_err());
    }

    #[test]
    fn witnesses_pass_the_checker() {
        for n in 2..=10 {
            let out = dimension_search_general(n).unwrap();
            let w = out.witness.unwrap();
            assert_eq!(w.n(), n);
            assert!(check_gf2_condition(&w).unwrap(), "n={n}");
            assert!(w.vectors().windows(2).all(|p| p[0] < p[1]));
        }
    }
}
