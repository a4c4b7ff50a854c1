//! Exact scalars of the form `(a + b·i) / √2^s` with integer `a`, `b`.

use std::fmt;
use std::ops::{Mul, Neg};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::QsimError;
use crate::Rational;

/// A Gaussian integer numerator. Internal building block for state vectors
/// that share one `√2` denominator across all entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub(crate) struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: Self = Self { re: 0, im: 0 };
    pub const ONE: Self = Self { re: 1, im: 0 };
    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> i128 {
        let (re, im) = (self.re as i128, self.im as i128);
        re * re + im * im
    }

    pub fn is_even(self) -> bool {
        self.re % 2 == 0 && self.im % 2 == 0
    }

    pub fn halve(self) -> Self {
        Self { re: self.re / 2, im: self.im / 2 }
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        Some(Self { re: self.re.checked_add(rhs.re)?, im: self.im.checked_add(rhs.im)? })
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        let re = self.re.checked_mul(rhs.re)?.checked_sub(self.im.checked_mul(rhs.im)?)?;
        let im = self.re.checked_mul(rhs.im)?.checked_add(self.im.checked_mul(rhs.re)?)?;
        Some(Self { re, im })
    }
}

impl Mul for GaussInt {
    type Output = GaussInt;

    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("Gaussian integer overflow")
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;

    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

/// `2^exp` as an exact rational denominator.
pub(crate) fn pow2(exp: u32) -> Result<i128, QsimError> {
    if exp >= 126 {
        return Err(QsimError::Overflow);
    }
    Ok(1i128 << exp)
}

/// An exact complex amplitude `(re_int + im_int·i) / √2^sqrt2_scale`.
///
/// Values are kept in canonical form: whenever both integers are even and the
/// scale is at least 2, the integers are halved and the scale drops by 2. Zero
/// is always stored with scale 0. Equality is structural on canonical forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactAmplitude {
    re_int: i64,
    im_int: i64,
    sqrt2_scale: u32,
}

impl ExactAmplitude {
    pub const ZERO: Self = Self { re_int: 0, im_int: 0, sqrt2_scale: 0 };
    pub const ONE: Self = Self { re_int: 1, im_int: 0, sqrt2_scale: 0 };
    pub const I: Self = Self { re_int: 0, im_int: 1, sqrt2_scale: 0 };
    /// `1/√2`
    pub const FRAC_1_SQRT_2: Self = Self { re_int: 1, im_int: 0, sqrt2_scale: 1 };

    /// Builds a canonical amplitude.
    pub fn new(re_int: i64, im_int: i64, sqrt2_scale: u32) -> Self {
        let mut a = Self { re_int, im_int, sqrt2_scale };
        a.canonicalize();
        a
    }

    pub(crate) fn from_gauss(g: GaussInt, sqrt2_scale: u32) -> Self {
        Self::new(g.re, g.im, sqrt2_scale)
    }

    fn canonicalize(&mut self) {
        if self.re_int == 0 && self.im_int == 0 {
            self.sqrt2_scale = 0;
            return;
        }
        while self.sqrt2_scale >= 2 && self.re_int % 2 == 0 && self.im_int % 2 == 0 {
            self.re_int /= 2;
            self.im_int /= 2;
            self.sqrt2_scale -= 2;
        }
    }

    pub fn re_int(&self) -> i64 {
        self.re_int
    }

    pub fn im_int(&self) -> i64 {
        self.im_int
    }

    pub fn sqrt2_scale(&self) -> u32 {
        self.sqrt2_scale
    }

    pub fn is_zero(&self) -> bool {
        self.re_int == 0 && self.im_int == 0
    }

    pub fn conj(&self) -> Self {
        Self { im_int: -self.im_int, ..*self }
    }

    /// Rewrites the numerators over a larger denominator `√2^target`.
    ///
    /// Only even differences are representable with integer numerators.
    pub fn rescaled(&self, target: u32) -> Result<(i64, i64), QsimError> {
        if self.is_zero() {
            return Ok((0, 0));
        }
        if target < self.sqrt2_scale || (target - self.sqrt2_scale) % 2 != 0 {
            return Err(QsimError::Inexact(format!(
                "cannot express scale {} over scale {}",
                self.sqrt2_scale, target
            )));
        }
        let shift = (target - self.sqrt2_scale) / 2;
        if shift >= 62 {
            return Err(QsimError::Overflow);
        }
        let k = 1i64 << shift;
        match (self.re_int.checked_mul(k), self.im_int.checked_mul(k)) {
            (Some(re), Some(im)) => Ok((re, im)),
            _ => Err(QsimError::Overflow),
        }
    }

    /// Exact sum. Fails when the two scales differ by an odd amount, since the
    /// result then involves a bare `√2` that no integer numerator can carry.
    pub fn checked_add(&self, rhs: &Self) -> Result<Self, QsimError> {
        if self.is_zero() {
            return Ok(*rhs);
        }
        if rhs.is_zero() {
            return Ok(*self);
        }
        let target = self.sqrt2_scale.max(rhs.sqrt2_scale);
        let (a_re, a_im) = self.rescaled(target)?;
        let (b_re, b_im) = rhs.rescaled(target)?;
        match (a_re.checked_add(b_re), a_im.checked_add(b_im)) {
            (Some(re), Some(im)) => Ok(Self::new(re, im, target)),
            _ => Err(QsimError::Overflow),
        }
    }

    /// `|a|^2` as an exact rational.
    pub fn norm_sqr(&self) -> Rational {
        let num = GaussInt::new(self.re_int, self.im_int).norm_sqr();
        Rational::new(num, 1i128 << self.sqrt2_scale)
    }

    /// Floating-point view, for display only.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        let d = 2f64.powf(self.sqrt2_scale as f64 / 2.0);
        (self.re_int as f64 / d, self.im_int as f64 / d)
    }
}

impl Default for ExactAmplitude {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Zero for ExactAmplitude {
    fn zero() -> Self {
        Self::ZERO
    }

    fn is_zero(&self) -> bool {
        ExactAmplitude::is_zero(self)
    }
}

impl std::ops::Add for ExactAmplitude {
    type Output = ExactAmplitude;

    /// Panics on odd scale mismatch; use [`ExactAmplitude::checked_add`] when
    /// that can happen.
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("inexact amplitude addition")
    }
}

impl Mul for ExactAmplitude {
    type Output = ExactAmplitude;

    fn mul(self, rhs: Self) -> Self {
        let g = GaussInt::new(self.re_int, self.im_int) * GaussInt::new(rhs.re_int, rhs.im_int);
        Self::from_gauss(g, self.sqrt2_scale + rhs.sqrt2_scale)
    }
}

impl Neg for ExactAmplitude {
    type Output = ExactAmplitude;

    fn neg(self) -> Self {
        Self { re_int: -self.re_int, im_int: -self.im_int, ..self }
    }
}

impl fmt::Display for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = match (self.re_int, self.im_int) {
            (re, 0) => format!("{re}"),
            (0, im) => format!("{im}i"),
            (re, im) if im < 0 => format!("({re}-{}i)", -im),
            (re, im) => format!("({re}+{im}i)"),
        };
        if self.sqrt2_scale == 0 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/√2^{}", self.sqrt2_scale)
        }
    }
}
