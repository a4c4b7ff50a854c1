//! Brute-force oracles shared by the integration tests. None of them call
//! into the library's own search code.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Whether every subset of size `≡ 2 (mod 4)` has a nonzero XOR, walking all
/// `2^n` subsets in Gray-code order with a running sum.
pub fn gray_code_condition(vectors: &[u64]) -> bool {
    let n = vectors.len();
    let mut sum = 0u64;
    let mut size = 0usize;
    let mut members = 0u64;
    for i in 1u64..1 << n {
        let flip = i.trailing_zeros() as usize;
        sum ^= vectors[flip];
        members ^= 1 << flip;
        size = if members >> flip & 1 == 1 { size + 1 } else { size - 1 };
        if size % 4 == 2 && sum == 0 {
            return false;
        }
    }
    true
}

/// Output of atom `a` (0 = constant 0, 1 = constant 1, 2 = copy, 3 = flip)
/// on hint `h`.
fn atom_output(a: usize, h: usize) -> usize {
    match a {
        0 => 0,
        1 => 1,
        2 => h,
        _ => 1 - h,
    }
}

/// Minimum number of losing pairs over all `4^n` atom assignments, and the
/// class-size profiles attaining it.
pub struct PairLossOracle {
    pub min_losing_pairs: u64,
    pub pairs: u64,
    pub argmin_profiles: BTreeSet<[usize; 4]>,
}

pub fn brute_force_pair_loss(n: usize) -> PairLossOracle {
    // pair (a, b) is lost when no hint makes the outputs differ
    let mut lost = [[false; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            lost[a][b] = (0..2).all(|h| atom_output(a, h) == atom_output(b, h));
        }
    }
    let mut best = u64::MAX;
    let mut argmin = BTreeSet::new();
    let mut atoms = vec![0usize; n];
    for code in 0u64..1 << (2 * n) {
        for (i, a) in atoms.iter_mut().enumerate() {
            *a = (code >> (2 * i) & 3) as usize;
        }
        let mut losing = 0;
        for i in 0..n {
            for j in i + 1..n {
                losing += lost[atoms[i]][atoms[j]] as u64;
            }
        }
        if losing <= best {
            if losing < best {
                best = losing;
                argmin.clear();
            }
            let mut profile = [0usize; 4];
            atoms.iter().for_each(|&a| profile[a] += 1);
            argmin.insert(profile);
        }
    }
    PairLossOracle { min_losing_pairs: best, pairs: (n * (n - 1) / 2) as u64, argmin_profiles: argmin }
}
