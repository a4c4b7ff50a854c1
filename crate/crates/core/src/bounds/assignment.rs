use serde::{Deserialize, Serialize};

use super::BoundsError;
use crate::strategies::{ClassicalAtomStrategy, StrategyAssignment};
use crate::Rational;

/// Atom class sizes `(#Const0, #Const1, #CopyHint, #FlipHint)`.
pub type ClassProfile = [usize; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSearchResult {
    pub n: usize,
    pub min_loss: Rational,
    /// Every class profile attaining `min_loss`, in lexicographic order.
    pub argmin: Vec<ClassProfile>,
    /// Number of profiles evaluated.
    pub profiles: usize,
}

/// Smallest losing probability of any one-hint-bit classical assignment on
/// the pair game, with best-response hints.
///
/// Relabeling players does not change the losing probability under the
/// uniform pair distribution, so every assignment is represented by its class
/// profile. Each profile is evaluated by building a representative assignment
/// and scoring every pair under its best hint.
pub fn exhaustive_min_loss(n: usize) -> Result<AssignmentSearchResult, BoundsError> {
    if !(5..=12).contains(&n) {
        return Err(BoundsError::Size { n, min: 5, max: 12 });
    }
    let mut best: Option<Rational> = None;
    let mut argmin = Vec::new();
    let mut profiles = 0;
    for profile in class_profiles(n) {
        profiles += 1;
        let loss = representative(&profile)?.losing_probability();
        match best {
            Some(b) if loss > b => {}
            Some(b) if loss == b => argmin.push(profile),
            _ => {
                best = Some(loss);
                argmin = vec![profile];
            }
        }
    }
    Ok(AssignmentSearchResult { n, min_loss: best.expect("at least one profile"), argmin, profiles })
}

/// All `(a, b, c, d)` with `a + b + c + d = n`, lexicographically.
pub fn class_profiles(n: usize) -> Vec<ClassProfile> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                out.push([a, b, c, n - a - b - c]);
            }
        }
    }
    out
}

/// Players `1..` get Const0, then Const1, CopyHint and FlipHint, by profile.
pub fn representative(profile: &ClassProfile) -> Result<StrategyAssignment, BoundsError> {
    let atoms = profile
        .iter()
        .zip(ClassicalAtomStrategy::ALL)
        .flat_map(|(&count, atom)| std::iter::repeat(atom).take(count))
        .collect();
    Ok(StrategyAssignment::best_response(atoms)?)
}

pub fn is_balanced(profile: &ClassProfile) -> bool {
    let max = profile.iter().max().copied().unwrap_or(0);
    let min = profile.iter().min().copied().unwrap_or(0);
    max - min <= 1
}
