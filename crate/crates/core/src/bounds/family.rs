use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::BoundsError;
use crate::games::BitString;

/// Largest supported vector dimension (one machine word per vector).
pub const MAX_DIMENSION: usize = 64;

/// Output bits of every player for every broadcast history: row `i`, column
/// `r` is what player `i` outputs when it is chosen and sees history `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTable {
    rows: Vec<BitString>,
}

impl ResponseTable {
    pub fn new(rows: Vec<BitString>) -> Result<Self, BoundsError> {
        let l = rows.first().map(BitString::len).unwrap_or(0);
        if l == 0 {
            return Err(BoundsError::Parse("response rows must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != l) {
            return Err(BoundsError::Parse("response rows differ in length".into()));
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of broadcast histories `|M|`.
    pub fn l(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    /// Whether the table wins every pair: some history separates each pair of
    /// rows.
    pub fn wins_all_pairs(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, a)| self.rows[i + 1..].iter().all(|b| a != b))
    }

    pub fn to_family(&self) -> Result<GF2Family, BoundsError> {
        GF2Family::from_rows(&self.rows)
    }
}

/// `n` vectors of `GF(2)^l`, one bitset per vector. The first coordinate is
/// the most significant bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GF2Family {
    dimension: usize,
    vectors: Vec<u64>,
}

impl GF2Family {
    pub fn new(dimension: usize, vectors: Vec<u64>) -> Result<Self, BoundsError> {
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(BoundsError::Parse(format!("dimension {dimension} outside 1..={MAX_DIMENSION}")));
        }
        if dimension < 64 {
            if let Some(v) = vectors.iter().find(|&&v| v >> dimension != 0) {
                return Err(BoundsError::Parse(format!("vector {v:#b} exceeds dimension {dimension}")));
            }
        }
        Ok(Self { dimension, vectors })
    }

    pub fn from_rows(rows: &[BitString]) -> Result<Self, BoundsError> {
        let dimension = rows.first().map(BitString::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dimension) {
            return Err(BoundsError::Parse("vectors differ in length".into()));
        }
        if dimension > MAX_DIMENSION {
            return Err(BoundsError::Parse(format!("dimension {dimension} above {MAX_DIMENSION}")));
        }
        Self::new(dimension, rows.iter().map(BitString::to_uint).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[u64] {
        &self.vectors
    }

    pub fn rows(&self) -> Vec<BitString> {
        self.vectors.iter().map(|&v| BitString::from_uint(v, self.dimension)).collect()
    }

    pub fn to_table(&self) -> Result<ResponseTable, BoundsError> {
        ResponseTable::new(self.rows())
    }

    /// One vector per line as a 0/1 string; blank lines and `#` comments are
    /// skipped.
    pub fn parse_text(text: &str) -> Result<Self, BoundsError> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<BitString>().map_err(|e| BoundsError::Parse(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if rows.is_empty() {
            return Err(BoundsError::Parse("family file has no vectors".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let _ = writeln!(out, "{row}");
        }
        out
    }
}

/// Largest family size [`check_gf2_condition`] accepts.
pub const MAX_CHECK_N: usize = 24;

/// Whether every subset of size `≡ 2 (mod 4)` has a nonzero sum.
///
/// Subsets are visited one size class at a time, skipping the sizes the
/// condition does not constrain.
pub fn check_gf2_condition(family: &GF2Family) -> Result<bool, BoundsError> {
    let n = family.n();
    if n > MAX_CHECK_N {
        return Err(BoundsError::Size { n, min: 0, max: MAX_CHECK_N });
    }
    Ok(first_zero_subset(family).is_none())
}

/// A subset (as a bitmask over vector positions) of size `≡ 2 (mod 4)` whose
/// vectors sum to zero, if one exists.
pub fn first_zero_subset(family: &GF2Family) -> Option<u64> {
    let n = family.n();
    let v = family.vectors();
    for k in (2..=n).step_by(4) {
        let mut subset: u64 = (1 << k) - 1;
        while subset < 1 << n {
            let mut sum = 0;
            let mut rest = subset;
            while rest != 0 {
                sum ^= v[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            if sum == 0 {
                return Some(subset);
            }
            // next subset of the same size
            let low = subset & subset.wrapping_neg();
            let ripple = subset + low;
            subset = (((ripple ^ subset) >> 2) / low) | ripple;
        }
    }
    None
}
