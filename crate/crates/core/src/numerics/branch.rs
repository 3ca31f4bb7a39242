use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use super::Precision;

/// Sign `s` in the convention (-1)^x := exp(s i pi x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Branch {
    /// s = +1.  This is the calibrated default: it makes the imaginary part
    /// of the ground-state nonperturbative correction positive.
    #[default]
    Upper,
    /// s = -1.
    Lower,
}

impl Branch {
    pub fn sign(self) -> i32 {
        match self {
            Branch::Upper => 1,
            Branch::Lower => -1,
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Upper => Branch::Lower,
            Branch::Lower => Branch::Upper,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+1" | "1" | "+" | "upper" => Ok(Branch::Upper),
            "-1" | "-" | "lower" => Ok(Branch::Lower),
            other => Err(format!("unknown branch '{other}' (expected +1 or -1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchedComplex {
    pub value: Complex,
    pub branch: Branch,
}

/// The unit phase exp(s i pi x), snapped to exact values at integer and
/// half-integer `x`.
pub fn branch_phase(exponent: &Float, branch: Branch, bits: u32) -> Complex {
    // reduce to r in [-1, 1] with x = 2k + r
    let half = Float::with_val(bits, exponent / 2u32);
    let k = Float::with_val(bits, half.round_ref());
    let r = Float::with_val(bits, exponent - Float::with_val(bits, &k * 2u32));
    let two_r = Float::with_val(bits, &r * 2u32);
    let s = branch.sign();
    if two_r.is_integer() {
        let quarter = two_r.to_i32_saturating().unwrap_or(0);
        // r in {-1, -1/2, 0, 1/2, 1}
        let (re, im) = match quarter {
            0 => (1, 0),
            1 => (0, s),
            -1 => (0, -s),
            _ => (-1, 0),
        };
        return Complex::with_val(bits, (re, im));
    }
    let pi = Float::with_val(bits, Constant::Pi);
    let angle = Float::with_val(bits, &r * &pi) * s;
    let (sin, cos) = angle.sin_cos(Float::new(bits));
    Complex::with_val(bits, (cos, sin))
}

/// (-magnitude)^exponent = magnitude^exponent * exp(s i pi exponent).
pub fn complex_pow_negative_base(
    magnitude: &Float,
    exponent: &Float,
    branch: Branch,
    precision: Precision,
) -> BranchedComplex {
    let bits = precision.guarded_bits();
    let modulus = Float::with_val(bits, magnitude).pow(Float::with_val(bits, exponent));
    let phase = branch_phase(exponent, branch, bits);
    let value = Complex::with_val(precision.bits(), phase * modulus);
    BranchedComplex { value, branch }
}
