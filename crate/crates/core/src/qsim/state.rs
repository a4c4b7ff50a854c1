use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::amplitude::{pow2, ExactAmplitude, GaussInt};
use super::QsimError;
use crate::Rational;

/// Default upper bound on the number of qubits a dense state may hold.
pub const DEFAULT_QUBIT_CAP: usize = 20;

/// Single-qubit measurement bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasBasis {
    /// `{|0⟩, |1⟩}`
    Computational,
    /// `|f_b⟩ = (|0⟩ ± |1⟩)/√2`
    Diagonal,
    /// `|g_b⟩ = (|0⟩ ± i|1⟩)/√2`
    Circular,
}

impl MeasBasis {
    pub const ALL: [MeasBasis; 3] = [MeasBasis::Computational, MeasBasis::Diagonal, MeasBasis::Circular];

    /// Numerators of the basis vector for `bit`, plus its `√2` scale.
    pub(crate) fn numerators(self, bit: u8) -> ([GaussInt; 2], u32) {
        let sign = if bit == 0 { 1 } else { -1 };
        match self {
            MeasBasis::Computational if bit == 0 => ([GaussInt::ONE, GaussInt::ZERO], 0),
            MeasBasis::Computational => ([GaussInt::ZERO, GaussInt::ONE], 0),
            MeasBasis::Diagonal => ([GaussInt::ONE, GaussInt::new(sign, 0)], 1),
            MeasBasis::Circular => ([GaussInt::ONE, GaussInt::new(0, sign)], 1),
        }
    }

    /// The two components of the basis vector for outcome `bit`.
    pub fn vector(self, bit: u8) -> [ExactAmplitude; 2] {
        let ([c0, c1], scale) = self.numerators(bit);
        [ExactAmplitude::from_gauss(c0, scale), ExactAmplitude::from_gauss(c1, scale)]
    }
}

/// One recorded single-qubit measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// 1-based qubit index.
    pub qubit_index: usize,
    pub basis: MeasBasis,
    pub outcome: u8,
}

/// Outcome of [`StateVector::measure_qubit`].
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub outcome: u8,
    pub state: StateVector,
    /// Exact Born probability of the sampled outcome.
    pub probability: Rational,
}

/// A dense, exactly normalized n-qubit state.
///
/// Every amplitude is `numerator / √2^scale` with a Gaussian-integer
/// numerator and one scale shared by the whole vector. Qubit 1 is the most
/// significant bit of the amplitude index. The nonzero support is cached at
/// construction, since all operations are read-only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<GaussInt>,
    scale: u32,
    support: Vec<usize>,
}

impl StateVector {
    /// Builds a state from numerators with a shared scale, normalizing the
    /// representation and checking the exact norm.
    fn from_parts(num_qubits: usize, amps: Vec<GaussInt>, scale: u32) -> Result<Self, QsimError> {
        let support = amps.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, _)| i).collect();
        Self::with_support(num_qubits, amps, support, scale)
    }

    /// Like [`StateVector::from_parts`] when the nonzero indices are already
    /// known (ascending), so the dense vector is never scanned.
    fn with_support(num_qubits: usize, mut amps: Vec<GaussInt>, support: Vec<usize>, mut scale: u32) -> Result<Self, QsimError> {
        debug_assert_eq!(amps.len(), 1usize << num_qubits);
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        while scale >= 2 && support.iter().all(|&x| amps[x].is_even()) {
            support.iter().for_each(|&x| amps[x] = amps[x].halve());
            scale -= 2;
        }
        let norm: i128 = support.iter().map(|&x| amps[x].norm_sqr()).sum();
        if norm != pow2(scale)? {
            return Err(QsimError::NotNormalized(Rational::new(norm, pow2(scale)?)));
        }
        Ok(Self { num_qubits, amps, scale, support })
    }

    /// Builds a state from explicit amplitudes. They must be expressible over
    /// one common `√2` scale and have exact squared norm 1.
    pub fn from_amplitudes(amplitudes: &[ExactAmplitude]) -> Result<Self, QsimError> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(QsimError::Inexact(format!("amplitude count {len} is not a power of two")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_cap(num_qubits, DEFAULT_QUBIT_CAP)?;
        let nonzero = amplitudes.iter().filter(|a| !a.is_zero());
        let max_scale = nonzero.clone().map(|a| a.sqrt2_scale()).max().unwrap_or(0);
        if !nonzero.clone().all(|a| (max_scale - a.sqrt2_scale()) % 2 == 0) {
            return Err(QsimError::Inexact("amplitudes mix odd and even √2 scales".into()));
        }
        let target = max_scale;
        let amps = amplitudes
            .iter()
            .map(|a| a.rescaled(target).map(|(re, im)| GaussInt::new(re, im)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parts(num_qubits, amps, target)
    }

    /// The computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn computational(num_qubits: usize, index: usize) -> Result<Self, QsimError> {
        check_cap(num_qubits, DEFAULT_QUBIT_CAP)?;
        if index >= 1usize << num_qubits {
            return Err(QsimError::Inexact(format!("basis index {index} out of range")));
        }
        let mut amps = vec![GaussInt::ZERO; 1 << num_qubits];
        amps[index] = GaussInt::ONE;
        Self::from_parts(num_qubits, amps, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Shared `√2` exponent of the stored numerators.
    pub fn shared_scale(&self) -> u32 {
        self.scale
    }

    /// Indices of the nonzero amplitudes, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn amplitude(&self, index: usize) -> ExactAmplitude {
        ExactAmplitude::from_gauss(self.amps[index], self.scale)
    }

    pub fn amplitudes(&self) -> Vec<ExactAmplitude> {
        (0..self.amps.len()).map(|i| self.amplitude(i)).collect()
    }

    /// Exact `Σ |a_x|^2`.
    pub fn squared_norm(&self) -> Rational {
        let num: i128 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        Rational::new(num, 1i128 << self.scale)
    }

    /// `self ⊗ other`; `self` occupies the most significant qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QsimError> {
        let n = self.num_qubits + other.num_qubits;
        check_cap(n, DEFAULT_QUBIT_CAP)?;
        let mut amps = vec![GaussInt::ZERO; 1 << n];
        for &x in &self.support {
            for &y in &other.support {
                let g = self.amps[x].checked_mul(other.amps[y]).ok_or(QsimError::Overflow)?;
                amps[(x << other.num_qubits) | y] = g;
            }
        }
        Self::from_parts(n, amps, self.scale + other.scale)
    }

    /// Debug dump: one line per nonzero amplitude, `index_bits re_int im_int scale`,
    /// using the canonical per-amplitude form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for &x in &self.support {
            let a = self.amplitude(x);
            let bits: String = (0..self.num_qubits)
                .map(|k| if x >> (self.num_qubits - 1 - k) & 1 == 1 { '1' } else { '0' })
                .collect();
            let _ = writeln!(out, "{} {} {} {}", bits, a.re_int(), a.im_int(), a.sqrt2_scale());
        }
        out
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QsimError> {
        if qubit == 0 || qubit > self.num_qubits {
            return Err(QsimError::QubitOutOfRange { qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Bit position of a 1-based qubit index.
    fn bit_of(&self, qubit: usize) -> usize {
        self.num_qubits - qubit
    }

    /// `⟨x_bit|_qubit ψ` as numerators over the `n-1` untouched qubits, with
    /// the scale those numerators live at. Only nonzero entries are
    /// returned, in ascending index order.
    fn contract(&self, qubit: usize, basis: MeasBasis, bit: u8) -> Result<(Vec<(usize, GaussInt)>, u32), QsimError> {
        let ([u0, u1], r) = basis.numerators(bit);
        let (c0, c1) = (u0.conj(), u1.conj());
        let pos = self.bit_of(qubit);
        let low_mask = (1usize << pos) - 1;
        let mut terms = Vec::with_capacity(self.support.len());
        for &x in &self.support {
            let y = ((x >> (pos + 1)) << pos) | (x & low_mask);
            let c = if x >> pos & 1 == 0 { c0 } else { c1 };
            terms.push((y, c.checked_mul(self.amps[x]).ok_or(QsimError::Overflow)?));
        }
        terms.sort_unstable_by_key(|t| t.0);
        let mut reduced: Vec<(usize, GaussInt)> = Vec::with_capacity(terms.len());
        for (y, g) in terms {
            match reduced.last_mut() {
                Some((last, acc)) if *last == y => *acc = acc.checked_add(g).ok_or(QsimError::Overflow)?,
                _ => reduced.push((y, g)),
            }
        }
        reduced.retain(|(_, g)| !g.is_zero());
        Ok((reduced, self.scale + r))
    }

    /// Squared-norm numerators of both outcomes, over the common `2^scale`.
    fn outcome_weights(&self, qubit: usize, basis: MeasBasis) -> Result<([i128; 2], u32), QsimError> {
        let mut weights = [0i128; 2];
        let mut scale = 0;
        for bit in 0..2u8 {
            let (reduced, s) = self.contract(qubit, basis, bit)?;
            weights[bit as usize] = reduced.iter().map(|(_, g)| g.norm_sqr()).sum();
            scale = s;
        }
        Ok((weights, scale))
    }

    /// Projects onto outcome `bit` without sampling. Returns `None` when the
    /// outcome has probability zero.
    ///
    /// The collapsed state keeps all `n` qubits; the measured one is left in
    /// the basis vector for `bit`.
    pub fn project(&self, qubit: usize, basis: MeasBasis, bit: u8) -> Result<Option<(StateVector, Rational)>, QsimError> {
        self.check_qubit(qubit)?;
        let Some((reduced, prob)) = self.reduced_outcome(qubit, basis, bit)? else {
            return Ok(None);
        };
        let ([u0, u1], r) = basis.numerators(bit);
        let pos = self.bit_of(qubit);
        let low_mask = (1usize << pos) - 1;
        let mut amps = vec![GaussInt::ZERO; self.amps.len()];
        for &y in reduced.support() {
            let hi = (y >> pos) << (pos + 1);
            let lo = y & low_mask;
            let g = reduced.amps[y];
            amps[hi | lo] = u0.checked_mul(g).ok_or(QsimError::Overflow)?;
            amps[hi | (1 << pos) | lo] = u1.checked_mul(g).ok_or(QsimError::Overflow)?;
        }
        let state = Self::from_parts(self.num_qubits, amps, reduced.scale + r)?;
        Ok(Some((state, prob)))
    }

    /// Like [`StateVector::project`], but the measured qubit is removed and
    /// the remaining `n-1` qubits keep their relative order.
    pub fn project_discard(&self, qubit: usize, basis: MeasBasis, bit: u8) -> Result<Option<(StateVector, Rational)>, QsimError> {
        self.check_qubit(qubit)?;
        self.reduced_outcome(qubit, basis, bit)
    }

    fn reduced_outcome(&self, qubit: usize, basis: MeasBasis, bit: u8) -> Result<Option<(StateVector, Rational)>, QsimError> {
        let (entries, scale) = self.contract(qubit, basis, bit)?;
        let weight: i128 = entries.iter().map(|(_, g)| g.norm_sqr()).sum();
        if weight == 0 {
            return Ok(None);
        }
        let prob = Rational::new(weight, pow2(scale)?);
        // Renormalizing multiplies by √(2^scale / weight); exact only when the
        // weight is a power of two, in which case the new scale is log2(weight).
        if weight.count_ones() != 1 {
            return Err(QsimError::Inexact(format!(
                "collapse renormalization by 1/sqrt({prob}) is not a power of sqrt(2)"
            )));
        }
        let new_scale = weight.trailing_zeros();
        let mut reduced = vec![GaussInt::ZERO; self.amps.len() / 2];
        let support = entries.iter().map(|&(y, g)| {
            reduced[y] = g;
            y
        }).collect();
        let state = Self::with_support(self.num_qubits - 1, reduced, support, new_scale)?;
        Ok(Some((state, prob)))
    }

    /// Exact Born probabilities of outcomes 0 and 1.
    pub fn outcome_distribution(&self, qubit: usize, basis: MeasBasis) -> Result<[Rational; 2], QsimError> {
        self.check_qubit(qubit)?;
        let ([w0, w1], scale) = self.outcome_weights(qubit, basis)?;
        let d = pow2(scale)?;
        Ok([Rational::new(w0, d), Rational::new(w1, d)])
    }

    /// Samples a projective measurement of `qubit` in `basis`.
    ///
    /// The draw is an exact integer comparison against the outcome weights, so
    /// a zero-probability outcome is never returned.
    pub fn measure_qubit<R: Rng + ?Sized>(&self, qubit: usize, basis: MeasBasis, rng: &mut R) -> Result<Measurement, QsimError> {
        self.measure_with(qubit, basis, rng, false)
    }

    /// Samples a measurement and discards the measured qubit from the result.
    pub fn measure_qubit_discard<R: Rng + ?Sized>(&self, qubit: usize, basis: MeasBasis, rng: &mut R) -> Result<Measurement, QsimError> {
        self.measure_with(qubit, basis, rng, true)
    }

    fn measure_with<R: Rng + ?Sized>(&self, qubit: usize, basis: MeasBasis, rng: &mut R, discard: bool) -> Result<Measurement, QsimError> {
        self.check_qubit(qubit)?;
        let ([w0, w1], _) = self.outcome_weights(qubit, basis)?;
        let total = (w0 + w1) as u128;
        let outcome = if rng.gen_range(0..total) < w0 as u128 { 0 } else { 1 };
        let projected = if discard {
            self.project_discard(qubit, basis, outcome)?
        } else {
            self.project(qubit, basis, outcome)?
        };
        let (state, probability) = projected.expect("sampled outcome has positive weight");
        Ok(Measurement { outcome, state, probability })
    }

    /// Exact probability that the listed qubits, each measured in its basis,
    /// yield the listed bits. Unlisted qubits are marginalized.
    ///
    /// Computes `⟨ψ|Π|ψ⟩` for the product projector `Π` by pairing nonzero
    /// amplitudes that agree on the unlisted qubits, so the cost depends on
    /// the support size rather than `2^n`.
    pub fn outcome_probability(&self, assignment: &[(usize, MeasBasis, u8)]) -> Result<Rational, QsimError> {
        let mut listed = 0usize;
        let mut projector: Vec<(usize, [GaussInt; 2])> = Vec::with_capacity(assignment.len());
        let mut extra_scale = 0u32;
        for &(qubit, basis, bit) in assignment {
            self.check_qubit(qubit)?;
            let pos = self.bit_of(qubit);
            if listed >> pos & 1 == 1 {
                return Err(QsimError::DuplicateQubit(qubit));
            }
            listed |= 1 << pos;
            let (u, r) = basis.numerators(bit);
            extra_scale += r;
            projector.push((pos, u));
        }
        let unlisted = ((1usize << self.num_qubits) - 1) & !listed;

        let mut support = self.support.clone();
        support.sort_by_key(|&x| (x & unlisted, x));
        let mut acc = GaussInt::ZERO;
        for bucket in support.chunk_by(|&a, &b| a & unlisted == b & unlisted) {
            for &x in bucket {
                for &y in bucket {
                    // conj(ψ_x) ψ_y Π_q u[x_q] conj(u[y_q])
                    let mut term = self.amps[x].conj().checked_mul(self.amps[y]).ok_or(QsimError::Overflow)?;
                    for &(pos, u) in &projector {
                        let ux = u[x >> pos & 1];
                        let uy = u[y >> pos & 1].conj();
                        term = term.checked_mul(ux).and_then(|t| t.checked_mul(uy)).ok_or(QsimError::Overflow)?;
                        if term.is_zero() {
                            break;
                        }
                    }
                    acc = acc.checked_add(term).ok_or(QsimError::Overflow)?;
                }
            }
        }
        debug_assert_eq!(acc.im, 0, "expectation of a projector is real");
        // numerators live at √2^(2·scale + 2·extra) = 2^(scale + extra)
        Ok(Rational::new(acc.re as i128, pow2(self.scale + extra_scale)?))
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), QsimError> {
    if n > cap {
        return Err(QsimError::SizeOutOfRange { n, cap });
    }
    Ok(())
}

/// The n-qubit GHZ state `(|0…0⟩ + |1…1⟩)/√2`.
pub fn make_ghz(n: usize) -> Result<StateVector, QsimError> {
    make_ghz_with_cap(n, DEFAULT_QUBIT_CAP)
}

pub fn make_ghz_with_cap(n: usize, cap: usize) -> Result<StateVector, QsimError> {
    if n == 0 {
        return Err(QsimError::SizeOutOfRange { n, cap });
    }
    check_cap(n, cap)?;
    let mut amps = vec![GaussInt::ZERO; 1 << n];
    amps[0] = GaussInt::ONE;
    amps[(1 << n) - 1] = GaussInt::ONE;
    StateVector::from_parts(n, amps, 1)
}

/// Single-qubit state for the basis vector of `bit`.
pub fn basis_state(basis: MeasBasis, bit: u8) -> StateVector {
    let (u, r) = basis.numerators(bit);
    StateVector::from_parts(1, u.to_vec(), r).expect("basis vectors are normalized")
}

/// Exact inner product `⟨a|b⟩`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<ExactAmplitude, QsimError> {
    if a.num_qubits != b.num_qubits {
        return Err(QsimError::Inexact("inner product of states with different sizes".into()));
    }
    let mut acc = GaussInt::ZERO;
    for &x in &a.support {
        let term = a.amps[x].conj().checked_mul(b.amps[x]).ok_or(QsimError::Overflow)?;
        acc = acc.checked_add(term).ok_or(QsimError::Overflow)?;
    }
    Ok(ExactAmplitude::from_gauss(acc, a.scale + b.scale))
}
