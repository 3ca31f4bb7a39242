use std::sync::Mutex;

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use super::{NumericsError, Precision};

/// Bernoulli numbers B_0, B_1, ... computed exactly and memoised.
static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

fn bernoulli_upto(n: usize) -> Vec<Rational> {
    let mut table = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if table.is_empty() {
        table.push(Rational::from(1));
    }
    while table.len() <= n {
        let k = table.len();
        // sum_{j<k} C(k+1, j) B_j + (k+1) B_k = 0
        let mut acc = Rational::new();
        let mut binom = Integer::from(1);
        for (j, b) in table.iter().enumerate() {
            acc += Rational::from(&binom * b.numer()) / b.denom();
            binom *= k + 1 - j;
            binom /= j + 1;
        }
        table.push(-acc / Integer::from(k + 1));
    }
    table[..=n].to_vec()
}

/// Fails when `x` sits on (or within a few ulps of) a non-positive integer.
pub fn pole_guard(x: &Float) -> Result<(), NumericsError> {
    if *x > 0.5 {
        return Ok(());
    }
    let nearest = Float::with_val(x.prec(), x.round_ref());
    let offset = Float::with_val(x.prec(), x - &nearest).abs();
    let scale = if x.clone().abs() > 1 { x.clone().abs() } else { Float::with_val(x.prec(), 1) };
    let tol = scale >> (x.prec() as i32 - 12);
    if offset <= tol {
        return Err(NumericsError::Pole(format!("{:.6e}", x.to_f64())));
    }
    Ok(())
}

/// Smallest argument at which the Stirling series is used directly.
fn stirling_threshold(bits: u32) -> u32 {
    let digits = (f64::from(bits) / std::f64::consts::LOG2_10).ceil() as u32;
    (digits / 2).max(10)
}

/// sin(pi x) with the argument reduced exactly to [-1/2, 1/2] first.
fn sin_pi(x: &Float, bits: u32) -> Float {
    let n = Float::with_val(bits, x.round_ref());
    let r = Float::with_val(bits, x - &n);
    let pi = Float::with_val(bits, Constant::Pi);
    let s = Float::with_val(bits, &r * &pi).sin();
    let odd = n.to_integer().map(|i| i.is_odd()).unwrap_or(false);
    if odd {
        -s
    } else {
        s
    }
}

fn cos_pi(x: &Float, bits: u32) -> Float {
    let shifted = Float::with_val(bits, x + 0.5);
    sin_pi(&shifted, bits)
}

/// ln Gamma(z) for z at or above the Stirling threshold, evaluated at `bits`.
pub fn ln_gamma_shifted(z: &Float, bits: u32) -> Float {
    let z = Float::with_val(bits, z);
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let mut sum = Float::with_val(bits, &z - 0.5) * z.clone().ln();
    sum -= &z;
    sum += two_pi.ln() / 2u32;
    let tol = Float::with_val(bits, 1) >> (bits as i32);
    let z2 = Float::with_val(bits, &z * &z);
    let mut zpow = z.clone();
    let mut k = 1usize;
    loop {
        let b = bernoulli_upto(2 * k).pop().unwrap_or_default();
        let denom = Integer::from(2 * k) * Integer::from(2 * k - 1);
        let coef = Float::with_val(bits, &b) / Float::with_val(bits, &denom);
        let term = coef / &zpow;
        sum += &term;
        if term.abs() <= tol.clone() * sum.clone().abs() || k > 4 * bits as usize {
            break;
        }
        zpow *= &z2;
        k += 1;
    }
    sum
}

/// psi(z) from its asymptotic series, z at or above the Stirling threshold.
fn digamma_asymptotic(z: &Float, bits: u32) -> Float {
    let z = Float::with_val(bits, z);
    let mut sum = z.clone().ln() - Float::with_val(bits, z.recip_ref()) / 2u32;
    let tol = Float::with_val(bits, 1) >> (bits as i32);
    let z2 = Float::with_val(bits, &z * &z);
    let mut zpow = z2.clone();
    let mut k = 1usize;
    loop {
        let b = bernoulli_upto(2 * k).pop().unwrap_or_default();
        let coef = Float::with_val(bits, &b) / Float::with_val(bits, 2 * k);
        let term = coef / &zpow;
        sum -= &term;
        if term.abs() <= tol.clone() * sum.clone().abs() || k > 4 * bits as usize {
            break;
        }
        zpow *= &z2;
        k += 1;
    }
    sum
}

/// Gamma function at `precision`.
pub fn gamma(x: &Float, precision: Precision) -> Result<Float, NumericsError> {
    pole_guard(x)?;
    let bits = precision.guarded_bits();
    let value = gamma_at(&Float::with_val(bits, x), bits);
    Ok(Float::with_val(precision.bits(), value))
}

fn gamma_at(x: &Float, bits: u32) -> Float {
    if *x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let one_minus = Float::with_val(bits, 1 - x);
        let pi = Float::with_val(bits, Constant::Pi);
        return pi / (sin_pi(x, bits) * gamma_at(&one_minus, bits));
    }
    let threshold = stirling_threshold(bits);
    let mut z = x.clone();
    let mut product = Float::with_val(bits, 1);
    while z < threshold {
        product *= &z;
        z += 1u32;
    }
    ln_gamma_shifted(&z, bits).exp() / product
}

/// Digamma function at `precision`.
pub fn digamma(x: &Float, precision: Precision) -> Result<Float, NumericsError> {
    pole_guard(x)?;
    let bits = precision.guarded_bits();
    let value = digamma_at(&Float::with_val(bits, x), bits);
    Ok(Float::with_val(precision.bits(), value))
}

fn digamma_at(x: &Float, bits: u32) -> Float {
    if *x < 0.5 {
        // reflection: psi(1-x) - psi(x) = pi cot(pi x)
        let one_minus = Float::with_val(bits, 1 - x);
        let pi = Float::with_val(bits, Constant::Pi);
        let cot = cos_pi(x, bits) / sin_pi(x, bits);
        return digamma_at(&one_minus, bits) - pi * cot;
    }
    let threshold = stirling_threshold(bits);
    let mut z = x.clone();
    let mut correction = Float::with_val(bits, 0);
    while z < threshold {
        correction += Float::with_val(bits, z.recip_ref());
        z += 1u32;
    }
    digamma_asymptotic(&z, bits) - correction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::agreeing_digits;

    fn p50() -> Precision {
        Precision::default()
    }

    #[test]
    fn bernoulli_prefix() {
        let b = bernoulli_upto(12);
        assert_eq!(b[1], Rational::from((-1, 2)));
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[4], Rational::from((-1, 30)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
        assert_eq!(b[7], Rational::new());
    }

    #[test]
    fn gamma_half_is_root_pi() {
        let p = p50();
        let g = gamma(&p.float(0.5), p).unwrap();
        let root_pi = p.pi().sqrt();
        assert!(agreeing_digits(&g, &root_pi, 60) >= 49);
    }

    #[test]
    fn gamma_negative_half() {
        let p = p50();
        let g = gamma(&p.float(-0.5), p).unwrap();
        let expect = p.pi().sqrt() * -2i32;
        assert!(agreeing_digits(&g, &expect, 60) >= 49);
    }

    #[test]
    fn gamma_quarter_against_mpfr() {
        let p = p50();
        let x = p.from_rational(&Rational::from((1, 4)));
        let ours = gamma(&x, p).unwrap();
        let reference = Float::with_val(p.bits() + 40, &x).gamma();
        assert!(agreeing_digits(&ours, &reference, 60) >= 49);
        assert!(ours.to_string_radix(10, Some(11)).starts_with("3.6256099082"));
    }

    #[test]
    fn gamma_poles_are_rejected() {
        let p = p50();
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(gamma(&p.float(x), p), Err(NumericsError::Pole(_))));
            assert!(matches!(digamma(&p.float(x), p), Err(NumericsError::Pole(_))));
        }
        // 1/4 - (3/4)(1/3) lands on zero only up to rounding
        let third = p.from_rational(&Rational::from((1, 3)));
        let arg = p.float(0.25) - third * p.float(0.75);
        assert!(gamma(&arg, p).is_err());
    }

    #[test]
    fn digamma_one_is_minus_euler_gamma() {
        let p = p50();
        let psi = digamma(&p.float(1), p).unwrap();
        let euler = -Float::with_val(p.bits(), Constant::Euler);
        assert!(agreeing_digits(&psi, &euler, 60) >= 49);
    }

    #[test]
    fn digamma_recurrence_at_seven_halves() {
        let p = p50();
        let x = p.float(3.5);
        let lhs = digamma(&x, p).unwrap() - digamma(&p.float(2.5), p).unwrap();
        let rhs = Float::with_val(p.bits(), 2.5).recip();
        assert!(agreeing_digits(&lhs, &rhs, 60) >= 48);
    }

    #[test]
    fn digamma_large_argument_matches_asymptotic_expansion() {
        let p = p50();
        let x = p.float(100.5);
        let psi = digamma(&x, p).unwrap();
        let approx = x.clone().ln() - Float::with_val(p.bits(), 201).recip();
        let diff = (psi - approx).abs().to_f64();
        assert!(diff < 1e-5, "diff {diff}");
    }

    #[test]
    fn digamma_against_mpfr_on_mixed_arguments() {
        let p = p50();
        for x in [-3.7, -0.25, 0.1, 0.75, 2.0, 13.25, 61.0] {
            let xf = p.float(x);
            let ours = digamma(&xf, p).unwrap();
            let reference = Float::with_val(p.bits() + 40, &xf).digamma();
            assert!(agreeing_digits(&ours, &reference, 60) >= 47, "x = {x}");
        }
    }
}
