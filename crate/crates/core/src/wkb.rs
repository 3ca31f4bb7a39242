//! Leading-order WKB quantization condition for the asymmetric triple well.
//!
//! Matching the parabolic-cylinder solutions around the central well
//! (index nu = E - eps/2 - 1/2) and the side wells (index
//! lambda = E/2 + eps/2 - 1/2) to the WKB solution under the barrier gives
//!
//! sqrt2/(pi g^2) e^{-1/(2g^2)} ((-1)^nu +- 1)/2 (2/g^2)^nu Gamma(-nu)
//!     (-1/g^2)^lambda Gamma(-lambda) = 1,
//!
//! the upper sign for even and the lower for odd parity.  Away from the
//! harmonic values the left-hand side is exponentially small, so every root
//! sits exponentially close to a Gamma pole.  Roots are defined by the sign
//! change of the real part of the residual (LHS - 1).

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};
use thiserror::Error;

use crate::bender_wu::Parity;
use crate::numerics::{branch_phase, complex_pow_negative_base, gamma, Branch, NumericsError, Precision};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WkbError {
    #[error("coupling must be positive")]
    NonPositiveCoupling,
    #[error("the quantization condition needs an even or odd parity")]
    MissingParity,
    #[error("seed {seed} is not within 0.4 of a harmonic value")]
    SeedOffHarmonic { seed: f64 },
    #[error("energy {0} is a Gamma pole of the quantization condition")]
    Pole(String),
    #[error("no sign change of the residual within 0.4 of {seed}")]
    NoBracket { seed: f64 },
}

impl From<NumericsError> for WkbError {
    fn from(e: NumericsError) -> Self {
        WkbError::Pole(e.to_string())
    }
}

const HALF_WIDTH: f64 = 0.4;

/// Parameters of one root search.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbLevelSpec {
    pub parity: Parity,
    pub g: Float,
    pub epsilon: Float,
    pub seed_energy: Float,
    pub precision: Precision,
}

impl WkbLevelSpec {
    pub fn new(
        parity: Parity,
        g: Float,
        epsilon: Float,
        seed_energy: Float,
        precision: Precision,
    ) -> Result<Self, WkbError> {
        if parity == Parity::NotApplicable {
            return Err(WkbError::MissingParity);
        }
        if g <= 0 {
            return Err(WkbError::NonPositiveCoupling);
        }
        let spec = WkbLevelSpec { parity, g, epsilon, seed_energy, precision };
        if spec.distance_to_harmonic() > HALF_WIDTH {
            return Err(WkbError::SeedOffHarmonic { seed: spec.seed_energy.to_f64() });
        }
        let eps_g2 = Float::with_val(64, &spec.epsilon * Float::with_val(64, spec.g.square_ref())).to_f64();
        if eps_g2.abs() >= 0.1 {
            log::warn!("eps g^2 = {eps_g2:.3e} is not small; the condition is outside its regime");
        }
        Ok(spec)
    }

    /// Seed n0 + 1/2 + eps/2 with the parity of n0.
    pub fn central(n0: u32, g: &Float, epsilon: &Float, precision: Precision) -> Result<Self, WkbError> {
        let bits = precision.guarded_bits();
        let seed = Float::with_val(bits, f64::from(n0) + 0.5) + Float::with_val(bits, epsilon / 2u32);
        let parity = if n0.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
        Self::new(parity, Float::with_val(bits, g), Float::with_val(bits, epsilon), seed, precision)
    }

    /// Seed 2n + 1 - eps.
    pub fn side(n: u32, parity: Parity, g: &Float, epsilon: &Float, precision: Precision) -> Result<Self, WkbError> {
        let bits = precision.guarded_bits();
        let seed = Float::with_val(bits, 2 * n + 1) - Float::with_val(bits, epsilon);
        Self::new(parity, Float::with_val(bits, g), Float::with_val(bits, epsilon), seed, precision)
    }

    fn bits(&self) -> u32 {
        self.precision.guarded_bits()
    }

    /// Harmonic values (Gamma poles) inside [lo, hi], ascending.
    fn poles_in(&self, lo: f64, hi: f64) -> Vec<Float> {
        let bits = self.bits();
        let mut out = Vec::new();
        let central0 = Float::with_val(bits, 0.5) + Float::with_val(bits, &self.epsilon / 2u32);
        let side0 = Float::with_val(bits, 1) - &self.epsilon;
        for (base, step) in [(central0, 1u32), (side0, 2u32)] {
            for k in 0..64u32 {
                let p = Float::with_val(bits, &base + k * step);
                let pf = p.to_f64();
                if pf > hi {
                    break;
                }
                if pf >= lo {
                    out.push(p);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out.dedup();
        out
    }

    fn distance_to_harmonic(&self) -> f64 {
        let s = self.seed_energy.to_f64();
        self.poles_in(s - 1.0, s + 1.0).iter().map(|p| (p.to_f64() - s).abs()).fold(f64::INFINITY, f64::min)
    }
}

/// LHS - 1 of the quantization condition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationResidual {
    pub value: Complex,
    pub branch: Branch,
}

/// A root of the real part of the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbRoot {
    pub energy: Float,
    /// Harmonic value the root detaches from.
    pub harmonic: Float,
    /// energy - harmonic.
    pub shift: Float,
    /// Imaginary part of the residual at the root.
    pub residual_imag: Float,
    /// More than one sign change was found in the bracket.
    pub multiple_roots: bool,
}

pub fn quantization_residual(
    energy: &Float,
    spec: &WkbLevelSpec,
    branch: Branch,
) -> Result<QuantizationResidual, WkbError> {
    let sign: i32 = match spec.parity {
        Parity::Even => 1,
        Parity::Odd => -1,
        Parity::NotApplicable => return Err(WkbError::MissingParity),
    };
    let p = spec.precision;
    let wide = p.widened(Precision::GUARD_DIGITS);
    let bits = spec.bits();
    let e = Float::with_val(bits, energy);
    let half_eps = Float::with_val(bits, &spec.epsilon / 2u32);
    // nu = E - 1/2 - eps/2, lambda = E/2 - 1/2 + eps/2
    let nu = Float::with_val(bits, &e - 0.5f64) - &half_eps;
    let lambda = Float::with_val(bits, Float::with_val(bits, &e / 2u32) - 0.5f64) + &half_eps;
    let gamma_nu = gamma(&Float::with_val(bits, -&nu), wide).map_err(|_| WkbError::Pole(format!("{e:.20}")))?;
    let gamma_lambda = gamma(&Float::with_val(bits, -&lambda), wide).map_err(|_| WkbError::Pole(format!("{e:.20}")))?;

    let g2 = Float::with_val(bits, spec.g.square_ref());
    let inv_g2 = Float::with_val(bits, g2.recip_ref());
    let pi = Float::with_val(bits, Constant::Pi);
    let decay = Float::with_val(bits, -Float::with_val(bits, &inv_g2 / 2u32)).exp();
    let prefactor = Float::with_val(bits, 2).sqrt() / pi * &inv_g2 * decay;

    let parity_factor = (branch_phase(&nu, branch, bits) + sign) / 2u32;
    let central_power = Float::with_val(bits, &inv_g2 * 2u32).pow(&nu);
    let side_power = complex_pow_negative_base(&inv_g2, &lambda, branch, wide).value;
    let real = prefactor * central_power * gamma_nu * gamma_lambda;
    let value = Complex::with_val(bits, parity_factor * side_power * real) - 1u32;
    Ok(QuantizationResidual { value: Complex::with_val(p.bits(), value), branch })
}

fn real_residual(e: &Float, spec: &WkbLevelSpec, branch: Branch) -> Result<Float, WkbError> {
    Ok(quantization_residual(e, spec, branch)?.value.real().clone())
}

/// A bracketed sign change [lo, hi] of Re residual, with the pole it sits next to.
struct Bracket {
    lo: Float,
    hi: Float,
    f_lo: Float,
    f_hi: Float,
    pole: Float,
}

/// Samples a subinterval densely on a uniform grid and geometrically
/// towards each endpoint that is a pole.
fn scan_subinterval(
    spec: &WkbLevelSpec,
    branch: Branch,
    a: &Float,
    b: &Float,
    pole_at_a: bool,
    pole_at_b: bool,
) -> Result<Vec<Bracket>, WkbError> {
    let bits = spec.bits();
    let width = Float::with_val(bits, b - a);
    let mut points: Vec<Float> = Vec::new();
    let interior = 16u32;
    for k in 1..interior {
        points.push(Float::with_val(bits, &width * k) / interior + a);
    }
    if !pole_at_a {
        points.push(a.clone());
    }
    if !pole_at_b {
        points.push(b.clone());
    }
    let depth = spec.precision.bits().saturating_sub(8);
    let base = Float::with_val(bits, &width / interior);
    for j in 1..depth {
        let d = Float::with_val(bits, &base >> j as i32);
        if pole_at_a {
            points.push(Float::with_val(bits, a + &d));
        }
        if pole_at_b {
            points.push(Float::with_val(bits, b - &d));
        }
    }
    points.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    points.dedup();
    let values = points.iter().map(|x| real_residual(x, spec, branch)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for i in 1..points.len() {
        if values[i - 1].is_sign_negative() != values[i].is_sign_negative() {
            let mid = Float::with_val(bits, &points[i - 1] + &points[i]) / 2u32;
            let da = Float::with_val(bits, &mid - a).abs();
            let db = Float::with_val(bits, &mid - b).abs();
            let pole = if (pole_at_a && da <= db) || !pole_at_b { a.clone() } else { b.clone() };
            out.push(Bracket {
                lo: points[i - 1].clone(),
                hi: points[i].clone(),
                f_lo: values[i - 1].clone(),
                f_hi: values[i].clone(),
                pole,
            });
        }
    }
    Ok(out)
}

/// Bisection down to a width small against the distance to the pole, then
/// safeguarded secant steps.
fn refine(spec: &WkbLevelSpec, branch: Branch, mut br: Bracket) -> Result<Float, WkbError> {
    let bits = spec.bits();
    let target = spec.precision.bits() as i32;
    let distance = |x: &Float| Float::with_val(bits, x - &br.pole).abs();
    for _ in 0..4 * bits {
        let width = Float::with_val(bits, &br.hi - &br.lo);
        if width <= Float::with_val(bits, distance(&br.lo) >> 24) {
            break;
        }
        let mid = Float::with_val(bits, &br.lo + &br.hi) / 2u32;
        if mid == br.lo || mid == br.hi {
            return Ok(mid);
        }
        let f = real_residual(&mid, spec, branch)?;
        if f.is_sign_negative() == br.f_lo.is_sign_negative() {
            br.lo = mid;
            br.f_lo = f;
        } else {
            br.hi = mid;
            br.f_hi = f;
        }
    }
    for _ in 0..64 {
        let slope = Float::with_val(bits, &br.f_hi - &br.f_lo);
        if slope.is_zero() {
            break;
        }
        let step = Float::with_val(bits, &br.f_lo * Float::with_val(bits, &br.hi - &br.lo)) / slope;
        let mut x = Float::with_val(bits, &br.lo - &step);
        if x <= br.lo || x >= br.hi {
            x = Float::with_val(bits, &br.lo + &br.hi) / 2u32;
        }
        let f = real_residual(&x, spec, branch)?;
        if f.is_zero() {
            return Ok(x);
        }
        if f.is_sign_negative() == br.f_lo.is_sign_negative() {
            br.lo = x;
            br.f_lo = f;
        } else {
            br.hi = x;
            br.f_hi = f;
        }
        let width = Float::with_val(bits, &br.hi - &br.lo);
        if width <= Float::with_val(bits, distance(&br.lo) >> target) {
            break;
        }
    }
    // the endpoint with the smaller residual
    let a = Float::with_val(bits, br.f_lo.abs_ref());
    let b = Float::with_val(bits, br.f_hi.abs_ref());
    Ok(if a <= b { br.lo } else { br.hi })
}

/// Root of Re residual within 0.4 of the seed.  When several sign changes
/// are present the root closest to the seed is returned and flagged.
pub fn solve_level(spec: &WkbLevelSpec, branch: Branch) -> Result<WkbRoot, WkbError> {
    let bits = spec.bits();
    let seed = &spec.seed_energy;
    let lo = Float::with_val(bits, seed - HALF_WIDTH);
    let hi = Float::with_val(bits, seed + HALF_WIDTH);
    let poles = spec.poles_in(lo.to_f64(), hi.to_f64());
    let mut edges: Vec<(Float, bool)> = vec![(lo.clone(), false)];
    edges.extend(poles.into_iter().filter(|p| *p > lo && *p < hi).map(|p| (p, true)));
    edges.push((hi, false));

    let mut brackets = Vec::new();
    for w in edges.windows(2) {
        brackets.extend(scan_subinterval(spec, branch, &w[0].0, &w[1].0, w[0].1, w[1].1)?);
    }
    if brackets.is_empty() {
        return Err(WkbError::NoBracket { seed: seed.to_f64() });
    }
    let multiple_roots = brackets.len() > 1;
    if multiple_roots {
        log::warn!("{} sign changes of the WKB residual near {:.6}", brackets.len(), seed.to_f64());
    }
    let nearest = brackets
        .into_iter()
        .min_by(|a, b| {
            let da = Float::with_val(bits, &a.lo - seed).abs();
            let db = Float::with_val(bits, &b.lo - seed).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("non-empty");
    let harmonic = nearest.pole.clone();
    let energy = refine(spec, branch, nearest)?;
    let residual_imag = quantization_residual(&energy, spec, branch)?.value.imag().clone();
    let out_bits = spec.precision.bits();
    Ok(WkbRoot {
        shift: Float::with_val(out_bits, &energy - &harmonic),
        energy: Float::with_val(out_bits, &energy),
        harmonic: Float::with_val(out_bits, &harmonic),
        residual_imag,
        multiple_roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonpert::{energy_st, Level, WellParams};
    use crate::numerics::agreeing_digits;

    fn p() -> Precision {
        Precision::default()
    }

    fn g_of(omega: f64) -> Float {
        Float::with_val(p().guarded_bits(), omega).recip().sqrt()
    }

    fn zero() -> Float {
        Float::new(p().guarded_bits())
    }

    #[test]
    fn residual_tends_to_minus_one_at_weak_coupling() {
        let spec = WkbLevelSpec::central(0, &g_of(400.0), &zero(), p()).unwrap();
        let r = quantization_residual(&Float::with_val(200, 0.7), &spec, Branch::Upper).unwrap();
        let diff = Complex::with_val(200, &r.value + 1u32).abs().real().to_f64();
        assert!(diff < 1e-50);
    }

    #[test]
    fn residual_blows_up_at_the_central_pole() {
        let spec = WkbLevelSpec::central(0, &g_of(30.0), &zero(), p()).unwrap();
        let near = |d: f64| {
            let e = Float::with_val(200, 0.5) + d;
            quantization_residual(&e, &spec, Branch::Upper).unwrap().value.abs().real().to_f64()
        };
        assert!(near(1e-30) > 1e3 && near(-1e-30) > 1e3);
        assert!(matches!(
            quantization_residual(&Float::with_val(200, 0.5), &spec, Branch::Upper),
            Err(WkbError::Pole(_))
        ));
    }

    #[test]
    fn ground_root_matches_valley_shift() {
        let g = g_of(50.0);
        let spec = WkbLevelSpec::central(0, &g, &zero(), p()).unwrap();
        let root = solve_level(&spec, Branch::Upper).unwrap();
        assert!(!root.multiple_roots);
        let params = WellParams::from_coupling(&g, &zero(), p()).unwrap();
        let expect = energy_st(Level::Central { n0: 0 }, &params, Branch::Upper).unwrap().shift_real;
        assert!(agreeing_digits(&root.shift, &expect, 60) >= 8);
    }

    #[test]
    fn odd_parity_has_no_root_at_the_central_ground_value() {
        let spec = WkbLevelSpec::new(Parity::Odd, g_of(50.0), zero(), Float::with_val(200, 0.5), p()).unwrap();
        assert!(matches!(solve_level(&spec, Branch::Upper), Err(WkbError::NoBracket { .. })));
    }

    #[test]
    fn branch_flip_conjugates_residual() {
        let spec = WkbLevelSpec::side(0, Parity::Even, &g_of(40.0), &Float::with_val(200, 0.05), p()).unwrap();
        let e = Float::with_val(200, 0.97);
        let up = quantization_residual(&e, &spec, Branch::Upper).unwrap().value;
        let down = quantization_residual(&e, &spec, Branch::Lower).unwrap().value;
        let conj = Complex::with_val(200, down.conj_ref());
        let diff = Complex::with_val(200, &up - &conj).abs().real().to_f64();
        assert!(diff < 1e-40);
    }

    #[test]
    fn seed_must_be_near_a_harmonic_value() {
        let r = WkbLevelSpec::new(Parity::Even, g_of(50.0), zero(), Float::with_val(200, 7.0), p());
        assert!(r.is_ok());
        let far =
            WkbLevelSpec::new(Parity::Even, g_of(50.0), Float::with_val(200, 0.3), Float::with_val(200, -1.0), p());
        assert!(matches!(far, Err(WkbError::SeedOffHarmonic { .. })));
    }
}
