//! Arithmetic substrate shared by every other module.
//!
//! Exact rationals are GMP rationals (always canonical), reals and complex
//! values are MPFR/MPC numbers carried at the bit precision implied by a
//! [`Precision`].  The special functions in [`special`] are implemented here
//! on top of the elementary MPFR operations.

mod branch;
mod special;

pub use branch::{branch_phase, complex_pow_negative_base, Branch, BranchedComplex};
pub use special::{digamma, gamma, ln_gamma_shifted, pole_guard};

pub use rug::{Complex, Float, Integer, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("precision of {0} decimal digits is below the supported minimum of 16")]
    PrecisionTooLow(u32),
    #[error("argument {0} is a pole (non-positive integer)")]
    Pole(String),
    #[error("invalid argument: {0}")]
    Domain(String),
}

/// Working precision, stated in decimal digits, rounding to nearest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { digits: Self::DEFAULT_DIGITS }
    }
}

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 50;
    pub const MIN_DIGITS: u32 = 16;
    /// Extra decimal digits carried inside special-function evaluations.
    pub const GUARD_DIGITS: u32 = 8;

    pub fn new(digits: u32) -> Result<Self, NumericsError> {
        if digits < Self::MIN_DIGITS {
            return Err(NumericsError::PrecisionTooLow(digits));
        }
        Ok(Precision { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Mantissa bits needed to represent `digits` decimal digits.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.digits)
    }

    /// Bits including the guard digits used for internal evaluation.
    pub fn guarded_bits(&self) -> u32 {
        digits_to_bits(self.digits + Self::GUARD_DIGITS)
    }

    /// A context carrying `extra` more decimal digits.
    pub fn widened(&self, extra: u32) -> Precision {
        Precision { digits: self.digits + extra }
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(&self, value: &Rational) -> Float {
        Float::with_val(self.bits(), value)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), rug::float::Constant::Pi)
    }

    /// Relative size of one unit in the last place at this precision.
    pub fn epsilon(&self) -> Float {
        Float::with_val(self.bits(), 1) >> (self.bits() as i32 - 1)
    }
}

fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 2
}

/// Number of leading decimal digits on which `a` and `b` agree, measured
/// relative to the larger magnitude.  Identical values report `cap`.
pub fn agreeing_digits(a: &Float, b: &Float, cap: u32) -> u32 {
    let diff = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    if diff.is_zero() {
        return cap;
    }
    let scale = if a.clone().abs() > b.clone().abs() { a.clone().abs() } else { b.clone().abs() };
    if scale.is_zero() {
        return 0;
    }
    let rel = (diff / scale).to_f64();
    if rel >= 1.0 {
        return 0;
    }
    let d = (-rel.log10()).floor();
    (d.max(0.0) as u32).min(cap)
}
