//! Closed-form nonperturbative corrections.
//!
//! Valley-method results for H(q; g, eps) = -1/2 d^2/dq^2 + q^2 (1 - g^2 q^2)^2 / 2
//! + eps (1 - 3 g^2 q^2) / 2:
//!
//! E_{n0}  = n0 + 1/2 + eps/2 + sqrt2/(pi g^2) e^{-1/(2g^2)} E2_{n0}
//! E_{n+-} = 2n + 1 - eps      + sqrt2/(pi g^2) e^{-1/(2g^2)} E2_{n+-}
//!
//! with complex E2 coefficients whose real parts shift the levels.  Terms of
//! order e^{-1/g^2} are not included.  The dilute-gas results for the
//! unscaled Hamiltonian H(x; omega) are provided alongside for comparison.
//! The two frames are related by H(x; omega) = omega H(sqrt(omega) x; omega^{-1/2}, 0).

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use thiserror::Error;

use crate::bender_wu::Parity;
use crate::numerics::{self, complex_pow_negative_base, gamma, Branch, NumericsError, Precision};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NonpertError {
    #[error("omega and g must be positive")]
    NonPositiveParameter,
    #[error("degenerate asymmetry: Gamma argument {0} is a pole (eps = +-(2N+1)/3 case)")]
    Degenerate(String),
    #[error("side-well levels need an explicit parity")]
    MissingParity,
    #[error("dilute-gas formulas exist for levels 0, 1, 2 only (got {0})")]
    UnsupportedLevel(u32),
}

impl From<NumericsError> for NonpertError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Pole(s) => NonpertError::Degenerate(s),
            other => NonpertError::Degenerate(other.to_string()),
        }
    }
}

/// Which family of formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Valley-method formulas (written "ST" in the tables).
    ValleyMethod,
    /// Dilute-gas instanton formulas (written "AL" in the tables).
    DiluteGas,
}

impl Formula {
    pub fn label(self) -> &'static str {
        match self {
            Formula::ValleyMethod => "ST",
            Formula::DiluteGas => "AL",
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "st" | "valley" => Ok(Formula::ValleyMethod),
            "al" | "dilute" => Ok(Formula::DiluteGas),
            other => Err(format!("unknown formula '{other}' (expected st or al)")),
        }
    }
}

/// omega, g = omega^{-1/2} and the asymmetry eps.  `g2` is 1/omega rounded
/// once, so omega g^2 = 1 at the working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct WellParams {
    pub omega: Float,
    pub g: Float,
    pub g2: Float,
    pub epsilon: Float,
    pub precision: Precision,
}

impl WellParams {
    pub fn from_omega(omega: &Float, epsilon: &Float, precision: Precision) -> Result<Self, NonpertError> {
        if *omega <= 0 {
            return Err(NonpertError::NonPositiveParameter);
        }
        let bits = precision.bits();
        let omega = Float::with_val(bits, omega);
        let g2 = Float::with_val(bits, omega.recip_ref());
        let g = Float::with_val(bits, g2.sqrt_ref());
        let params = WellParams { omega, g, g2, epsilon: Float::with_val(bits, epsilon), precision };
        params.warn_if_strongly_asymmetric();
        Ok(params)
    }

    pub fn from_coupling(g: &Float, epsilon: &Float, precision: Precision) -> Result<Self, NonpertError> {
        if *g <= 0 {
            return Err(NonpertError::NonPositiveParameter);
        }
        let bits = precision.bits();
        let g2 = Float::with_val(bits, g.square_ref());
        let omega = Float::with_val(bits, g2.recip_ref());
        let params =
            WellParams { omega, g: Float::with_val(bits, g), g2, epsilon: Float::with_val(bits, epsilon), precision };
        params.warn_if_strongly_asymmetric();
        Ok(params)
    }

    /// Whether eps g^2 is small enough (below 0.1) for the expansions to apply.
    pub fn is_weakly_asymmetric(&self) -> bool {
        Float::with_val(64, &self.epsilon * &self.g2).abs() < 0.1
    }

    fn warn_if_strongly_asymmetric(&self) {
        if !self.is_weakly_asymmetric() {
            log::warn!(
                "eps g^2 = {:.3e} is not small; formulas are outside their regime",
                Float::with_val(64, &self.epsilon * &self.g2).to_f64()
            );
        }
    }

    /// sqrt2/(pi g^2) e^{-1/(2 g^2)}.
    pub fn prefactor(&self) -> Float {
        let bits = self.precision.guarded_bits();
        let pi = Float::with_val(bits, Constant::Pi);
        let sqrt2 = Float::with_val(bits, 2).sqrt();
        let g2 = Float::with_val(bits, &self.g2);
        let expo = Float::with_val(bits, g2.recip_ref()) / 2u32;
        sqrt2 / (pi * g2) * (-expo).exp()
    }
}

/// A level of the triple well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Central { n0: u32 },
    Side { n: u32, parity: Parity },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonpertValue {
    /// Harmonic value n0 + 1/2 + eps/2 or 2n + 1 - eps.
    pub leading: Float,
    pub e2: Complex,
    pub shift_real: Float,
    pub shift_imag: Float,
    pub total_real: Float,
}

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// E2 for the n0-th central-well level.
pub fn e2_central(n0: u32, params: &WellParams, branch: Branch) -> Result<Complex, NonpertError> {
    let p = params.precision;
    let bits = p.guarded_bits();
    let eps = Float::with_val(bits, &params.epsilon);
    let three_quarter_eps = Float::with_val(bits, &eps * 3u32) / 4u32;
    // Gamma(-n0/2 + 1/4 - 3 eps/4)
    let gamma_arg = Float::with_val(bits, -(n0 as f64) / 2.0 + 0.25) - &three_quarter_eps;
    // eps carries only the working precision, so poles are judged there
    numerics::pole_guard(&Float::with_val(p.bits(), &gamma_arg))?;
    let gamma_value = gamma(&gamma_arg, p.widened(Precision::GUARD_DIGITS))?;
    let inv_g2 = Float::with_val(bits, params.g2.recip_ref());
    // (-1/g^2)^{n0/2 - 1/4 + 3 eps/4}
    let exponent = Float::with_val(bits, n0 as f64 / 2.0 - 0.25) + &three_quarter_eps;
    let phase_pow = complex_pow_negative_base(&inv_g2, &exponent, branch, p.widened(Precision::GUARD_DIGITS)).value;
    let two_over_g2 = Float::with_val(bits, &inv_g2 * 2u32).pow(n0);
    let real_factor = -(two_over_g2 * gamma_value) / Float::with_val(bits, &factorial(n0));
    Ok(Complex::with_val(p.bits(), phase_pow * real_factor))
}

/// E2 for the n-th side-well level of the given parity.
pub fn e2_side(n: u32, parity: Parity, params: &WellParams, branch: Branch) -> Result<Complex, NonpertError> {
    let sign: i32 = match parity {
        Parity::Even => 1,
        Parity::Odd => -1,
        Parity::NotApplicable => return Err(NonpertError::MissingParity),
    };
    let p = params.precision;
    let bits = p.guarded_bits();
    let eps = Float::with_val(bits, &params.epsilon);
    let three_half_eps = Float::with_val(bits, &eps * 3u32) / 2u32;
    // Gamma(-2n - 1/2 + 3 eps/2)
    let gamma_arg = Float::with_val(bits, -2.0 * n as f64 - 0.5) + &three_half_eps;
    // eps carries only the working precision, so poles are judged there
    numerics::pole_guard(&Float::with_val(p.bits(), &gamma_arg))?;
    let gamma_value = gamma(&gamma_arg, p.widened(Precision::GUARD_DIGITS))?;
    // (-1)^{(1 - 3 eps)/2} +- 1
    let phase_exp = Float::with_val(bits, 1 - Float::with_val(bits, &eps * 3u32)) / 2u32;
    let phase = numerics::branch_phase(&phase_exp, branch, bits) + sign;
    let inv_g2 = Float::with_val(bits, params.g2.recip_ref());
    let two_over_g2 = Float::with_val(bits, &inv_g2 * 2u32);
    let power_exp = Float::with_val(bits, 2.0 * n as f64 + 0.5) - &three_half_eps;
    let magnitude = two_over_g2.pow(&power_exp) * Float::with_val(bits, &inv_g2).pow(n) * gamma_value
        / Float::with_val(bits, &factorial(n));
    Ok(Complex::with_val(p.bits(), -(phase * magnitude)))
}

/// Leading plus first nonperturbative correction for one level, in the
/// rescaled frame.
pub fn energy_st(level: Level, params: &WellParams, branch: Branch) -> Result<NonpertValue, NonpertError> {
    let p = params.precision;
    let bits = p.bits();
    let (leading, e2) = match level {
        Level::Central { n0 } => {
            let lead = Float::with_val(bits, n0 as f64 + 0.5) + Float::with_val(bits, &params.epsilon / 2u32);
            (lead, e2_central(n0, params, branch)?)
        }
        Level::Side { n, parity } => {
            let lead = Float::with_val(bits, 2 * n + 1) - &params.epsilon;
            (lead, e2_side(n, parity, params, branch)?)
        }
    };
    let pre = params.prefactor();
    let shift_real = Float::with_val(bits, e2.real() * &pre);
    let shift_imag = Float::with_val(bits, e2.imag() * &pre);
    let total_real = Float::with_val(bits, &leading + &shift_real);
    Ok(NonpertValue { leading, e2, shift_real, shift_imag, total_real })
}

/// omega * Re E_0 of the valley-method formula at eps = 0, i.e. the ground
/// state of the unscaled Hamiltonian.
pub fn ground_energy_st_al_units(omega: &Float, precision: Precision) -> Float {
    let zero = Float::new(precision.bits());
    let params = WellParams::from_omega(omega, &zero, precision).expect("omega checked by caller");
    let value = energy_st(Level::Central { n0: 0 }, &params, Branch::default()).expect("eps = 0 is not degenerate");
    Float::with_val(precision.bits(), value.total_real * omega)
}

/// Dilute-gas levels 0, 1, 2 of the unscaled Hamiltonian.
pub fn energy_al(omega: &Float, level: u32, precision: Precision) -> Float {
    energy_al_checked(omega, level, precision).expect("level must be 0, 1 or 2")
}

pub fn energy_al_checked(omega: &Float, level: u32, precision: Precision) -> Result<Float, NonpertError> {
    if *omega <= 0 {
        return Err(NonpertError::NonPositiveParameter);
    }
    let bits = precision.guarded_bits();
    let w = Float::with_val(bits, omega);
    let root = || {
        let pi = Float::with_val(bits, Constant::Pi);
        let decay = Float::with_val(bits, -Float::with_val(bits, &w / 2u32)).exp();
        let inner = Float::with_val(bits, 1024) / (pi * 3u32) * &w * decay + 1u32;
        inner.sqrt()
    };
    let value = match level {
        0 => Float::with_val(bits, &w * (Float::with_val(bits, 0.75) - root() / 4u32)),
        1 => w.clone(),
        2 => Float::with_val(bits, &w * (Float::with_val(bits, 0.75) + root() / 4u32)),
        other => return Err(NonpertError::UnsupportedLevel(other)),
    };
    Ok(Float::with_val(precision.bits(), value))
}

/// Splitting E_2 - E_1 of the unscaled Hamiltonian.
pub fn delta21(omega: &Float, formula: Formula, precision: Precision) -> Float {
    let bits = precision.guarded_bits();
    let w = Float::with_val(bits, omega);
    let value = match formula {
        Formula::ValleyMethod => {
            // (8/sqrt pi) omega^{5/2} e^{-omega/2}
            let pi = Float::with_val(bits, Constant::Pi);
            let decay = Float::with_val(bits, -Float::with_val(bits, &w / 2u32)).exp();
            Float::with_val(bits, 8) / pi.sqrt() * w.pow(Float::with_val(bits, 2.5)) * decay
        }
        Formula::DiluteGas => {
            // omega (sqrt(1 + 1024/(3 pi) omega e^{-omega/2}) - 1) / 4, written
            // as x / (sqrt(1 + x) + 1) to avoid cancellation
            let pi = Float::with_val(bits, Constant::Pi);
            let decay = Float::with_val(bits, -Float::with_val(bits, &w / 2u32)).exp();
            let x = Float::with_val(bits, 1024) / (pi * 3u32) * &w * decay;
            let denom = Float::with_val(bits, &x + 1u32).sqrt() + 1u32;
            Float::with_val(bits, &w * x) / denom / 4u32
        }
    };
    Float::with_val(precision.bits(), value)
}
