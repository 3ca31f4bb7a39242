//! Large-order behaviour of the perturbative coefficients.
//!
//! A model Im E_NP(g) = C g^{-2(nu+1)} e^{-1/(b g^2)}, Re E_NP = A Im E_NP,
//! implies through the dispersion relation
//!
//! c^[2m] ~ cbar^[2m] = -(C/pi) b^{m+nu+1} Gamma(m+nu+1),
//!
//! and the smallest term of the series then sits near the root of
//! ln(b g^2) + psi(mu + nu + 1) = 0.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use thiserror::Error;

use crate::bender_wu::{RationalSeries, Well};
use crate::nonpert::{self, Level, NonpertError, WellParams};
use crate::numerics::{digamma, gamma, Branch, NumericsError, Precision};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticError {
    #[error("order {order} is outside the computed range 1..={available}")]
    OrderOutOfRange { order: usize, available: usize },
    #[error("model parameter b must be positive")]
    NonPositiveRate,
    #[error("coupling must be positive")]
    NonPositiveCoupling,
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("no critical order: b g^2 = {0:.6} leaves no root with mu > 0")]
    NoRoot(f64),
    #[error("b g^2 = {0:.6} is outside the small-coupling domain (needs < 1/4)")]
    OutsideDomain(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Nonpert(#[from] NonpertError),
}

/// Ground states with a known large-order prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroundState {
    Central,
    Side,
}

impl GroundState {
    pub fn well(self) -> Well {
        match self {
            GroundState::Central => Well::Central,
            GroundState::Side => Well::Side,
        }
    }

    pub fn model(self, precision: Precision) -> AsymptoticModel {
        match self {
            GroundState::Central => AsymptoticModel::central_ground(precision),
            GroundState::Side => AsymptoticModel::side_ground(precision),
        }
    }
}

/// Constants (A, C, b, nu) of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticModel {
    pub a: Float,
    pub c: Float,
    pub b: Float,
    pub nu: Float,
    pub precision: Precision,
}

impl AsymptoticModel {
    pub fn new(a: Float, c: Float, b: Float, nu: Float, precision: Precision) -> Result<Self, AsymptoticError> {
        if b <= 0 {
            return Err(AsymptoticError::NonPositiveRate);
        }
        Ok(AsymptoticModel { a, c, b, nu, precision })
    }

    /// (1, sqrt2/Gamma(3/4), 2, -1/4).
    pub fn central_ground(precision: Precision) -> Self {
        let bits = precision.guarded_bits();
        let g34 =
            gamma(&Float::with_val(bits, 0.75), precision.widened(Precision::GUARD_DIGITS)).expect("3/4 is regular");
        AsymptoticModel {
            a: Float::with_val(bits, 1),
            c: Float::with_val(bits, 2).sqrt() / g34,
            b: Float::with_val(bits, 2),
            nu: Float::with_val(bits, -0.25),
            precision,
        }
    }

    /// (1, 4/sqrt(pi), 2, 1/2).
    pub fn side_ground(precision: Precision) -> Self {
        let bits = precision.guarded_bits();
        let pi = Float::with_val(bits, Constant::Pi);
        AsymptoticModel {
            a: Float::with_val(bits, 1),
            c: Float::with_val(bits, 4) / pi.sqrt(),
            b: Float::with_val(bits, 2),
            nu: Float::with_val(bits, 0.5),
            precision,
        }
    }

    fn bits(&self) -> u32 {
        self.precision.guarded_bits()
    }

    /// C g^{-2(nu+1)} e^{-1/(b g^2)} at coupling g.
    pub fn im_enp(&self, g: &Float) -> Float {
        let bits = self.bits();
        let g2 = Float::with_val(bits, g.square_ref());
        let power = Float::with_val(bits, -Float::with_val(bits, &self.nu + 1u32));
        let decay = Float::with_val(bits, -Float::with_val(bits, &self.b * &g2).recip()).exp();
        Float::with_val(self.precision.bits(), &self.c * g2.pow(&power) * decay)
    }

    pub fn re_enp(&self, g: &Float) -> Float {
        Float::with_val(self.precision.bits(), &self.a * self.im_enp(g))
    }

    /// -(C/pi) b^{m+nu+1} Gamma(m+nu+1) for real order mu.
    pub fn cbar_at(&self, mu: &Float) -> Result<Float, AsymptoticError> {
        let bits = self.bits();
        let z = Float::with_val(bits, mu + &self.nu) + 1u32;
        let gz = gamma(&z, self.precision.widened(Precision::GUARD_DIGITS))?;
        let pi = Float::with_val(bits, Constant::Pi);
        let bz = Float::with_val(bits, (&self.b).pow(&z));
        Ok(Float::with_val(self.precision.bits(), -(Float::with_val(bits, &self.c / pi) * bz * gz)))
    }

    pub fn cbar(&self, m: u32) -> Result<Float, AsymptoticError> {
        self.cbar_at(&Float::with_val(self.bits(), m))
    }
}

/// Closed-form large-order prediction for the central or side ground state.
pub fn cbar(state: GroundState, m: u32, precision: Precision) -> Result<Float, AsymptoticError> {
    let bits = precision.guarded_bits();
    let wide = precision.widened(Precision::GUARD_DIGITS);
    let pi = Float::with_val(bits, Constant::Pi);
    let two_m = Float::with_val(bits, 2).pow(m);
    let value = match state {
        GroundState::Central => {
            // -(2^{5/4} / (pi Gamma(3/4))) 2^m Gamma(m + 3/4)
            let g34 = gamma(&Float::with_val(bits, 0.75), wide)?;
            let pre = Float::with_val(bits, 2).pow(Float::with_val(bits, 1.25)) / (pi * g34);
            -(pre * two_m * gamma(&Float::with_val(bits, f64::from(m) + 0.75), wide)?)
        }
        GroundState::Side => {
            // -(8 sqrt2 / pi^{3/2}) 2^m Gamma(m + 3/2)
            let pre = Float::with_val(bits, 8) * Float::with_val(bits, 2).sqrt() / pi.pow(Float::with_val(bits, 1.5));
            -(pre * two_m * gamma(&Float::with_val(bits, f64::from(m) + 1.5), wide)?)
        }
    };
    Ok(Float::with_val(precision.bits(), value))
}

/// c^[2m] / cbar^[2m] at each requested order.
pub fn ratio_table(
    series: &RationalSeries,
    state: GroundState,
    orders: &[usize],
    precision: Precision,
) -> Result<Vec<Float>, AsymptoticError> {
    let bits = precision.guarded_bits();
    orders
        .iter()
        .map(|&m| {
            if m == 0 || m > series.order() {
                return Err(AsymptoticError::OrderOutOfRange { order: m, available: series.order() });
            }
            let predicted = cbar(state, m as u32, precision.widened(Precision::GUARD_DIGITS))?;
            let exact = Float::with_val(bits, series.coefficient(m));
            Ok(Float::with_val(precision.bits(), exact / predicted))
        })
        .collect()
}

/// -(1/pi) int_0^inf Im E_NP(g) g^{-2m-2} dg^2, evaluated by exp-sinh
/// quadrature in t = g^2 with the mapping centred on the integrand's peak.
pub fn dispersion_coefficient(m: u32, model: &AsymptoticModel) -> Result<Float, AsymptoticError> {
    let p = model.precision;
    let bits = p.guarded_bits();
    let index = Float::with_val(bits, &model.nu + (m + 1));
    if index <= 0 {
        return Err(AsymptoticError::Quadrature(format!("m + nu + 1 = {} is not positive", index.to_f64())));
    }
    // integrand C t^{-(nu+m+2)} e^{-1/(b t)}, peaked at t* = 1/(b (nu+m+2))
    let exponent = Float::with_val(bits, &index + 1u32);
    let peak = Float::with_val(bits, Float::with_val(bits, &model.b * &exponent).recip_ref());
    let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
    let integrand = |s: &Float| -> Float {
        let sh = Float::with_val(bits, s.sinh_ref());
        let ch = Float::with_val(bits, s.cosh_ref());
        let u = Float::with_val(bits, &half_pi * &sh).exp();
        let t = Float::with_val(bits, &peak * &u);
        let jac = Float::with_val(bits, &t * &half_pi) * ch;
        let decay = Float::with_val(bits, -Float::with_val(bits, &model.b * &t).recip()).exp();
        let power = Float::with_val(bits, (&t).pow(&exponent)).recip();
        Float::with_val(bits, &model.c * power * decay * jac)
    };

    let tol = Float::with_val(bits, 10).pow(-((p.digits() as i32 - 6).clamp(10, 40)));
    let mut h = Float::with_val(bits, 0.5);
    let mut sum = Float::with_val(bits, 0);
    let mut estimate = Float::with_val(bits, 0);
    for level in 0..14 {
        // level 0 samples every multiple of h; later levels add the odd midpoints
        let step = if level == 0 { 1 } else { 2 };
        let start = if level == 0 { 0 } else { 1 };
        let mut level_sum = Float::with_val(bits, 0);
        for dir in [1i64, -1] {
            let mut k = if level == 0 && dir == -1 { 1 } else { start };
            loop {
                let s = Float::with_val(bits, &h * (dir * k));
                let f = integrand(&s);
                level_sum += &f;
                let scale = Float::with_val(bits, &sum + &level_sum).abs();
                if f.is_zero() || (k > 8 && f.clone().abs() < Float::with_val(bits, &scale * &tol) / 1000u32) {
                    break;
                }
                if k > 100_000 {
                    return Err(AsymptoticError::Quadrature("tail did not decay".into()));
                }
                k += step;
            }
        }
        sum += &level_sum;
        let next = Float::with_val(bits, &sum * &h);
        if level > 2 {
            let diff = Float::with_val(bits, &next - &estimate).abs();
            if diff <= Float::with_val(bits, next.clone().abs() * &tol) {
                let pi = Float::with_val(bits, Constant::Pi);
                return Ok(Float::with_val(p.bits(), -(next / pi)));
            }
        }
        estimate = next;
        h /= 2u32;
    }
    Err(AsymptoticError::Quadrature(format!("no convergence after 14 refinements (m = {m})")))
}

/// Root mu > 0 of ln(b g^2) + psi(mu + nu + 1) = 0.
pub fn critical_mu(model: &AsymptoticModel, g: &Float) -> Result<Float, AsymptoticError> {
    if *g <= 0 {
        return Err(AsymptoticError::NonPositiveCoupling);
    }
    let p = model.precision;
    let bits = p.guarded_bits();
    let bg2 = Float::with_val(bits, &model.b * Float::with_val(bits, g.square_ref()));
    if bg2 >= 1 {
        return Err(AsymptoticError::NoRoot(bg2.to_f64()));
    }
    let log_bg2 = Float::with_val(bits, bg2.ln_ref());
    let shift = Float::with_val(bits, &model.nu + 1u32);
    let f = |mu: &Float| -> Result<Float, AsymptoticError> {
        let z = Float::with_val(bits, mu + &shift);
        Ok(Float::with_val(bits, &log_bg2 + digamma(&z, p.widened(Precision::GUARD_DIGITS))?))
    };
    let mut lo = Float::with_val(bits, 0);
    if f(&lo)? >= 0 {
        return Err(AsymptoticError::NoRoot(bg2.to_f64()));
    }
    // psi(z) > ln z - 1/z, so z = 1/(b g^2) + 1 already has f >= 0
    let mut hi = Float::with_val(bits, bg2.recip_ref()) - &model.nu;
    let floor = Float::with_val(bits, 1) >> (p.bits() as i32);
    while Float::with_val(bits, &hi - &lo) > Float::with_val(bits, &hi * &floor) {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        if f(&mid)? < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Float::with_val(p.bits(), &lo + &hi) / 2u32)
}

/// sqrt(2 b e / (A^2 pi)) |g Re E_NP(g)|.
pub fn predicted_min_term(model: &AsymptoticModel, g: &Float) -> Result<Float, AsymptoticError> {
    if *g <= 0 {
        return Err(AsymptoticError::NonPositiveCoupling);
    }
    let bits = model.bits();
    let bg2 = Float::with_val(bits, &model.b * Float::with_val(bits, g.square_ref()));
    if bg2 >= 0.25 {
        return Err(AsymptoticError::OutsideDomain(bg2.to_f64()));
    }
    Ok(Float::with_val(
        model.precision.bits(),
        min_term_prefactor(model) * Float::with_val(bits, g * model.re_enp(g)).abs(),
    ))
}

/// f(mu; g) = |g^{2 mu} cbar^[2 mu]| at mu = critical_mu, with no
/// asymptotic simplification.
pub fn model_min_term(model: &AsymptoticModel, g: &Float) -> Result<Float, AsymptoticError> {
    let mu = critical_mu(model, g)?;
    let bits = model.bits();
    let g2 = Float::with_val(bits, g.square_ref());
    let weight = g2.pow(&mu);
    Ok(Float::with_val(model.precision.bits(), model.cbar_at(&mu)? * weight).abs())
}

/// sqrt(2 b e / (A^2 pi)).
pub fn min_term_prefactor(model: &AsymptoticModel) -> Float {
    let bits = model.bits();
    let e = Float::with_val(bits, 1).exp();
    let pi = Float::with_val(bits, Constant::Pi);
    let num = Float::with_val(bits, &model.b * 2u32) * e;
    let den = Float::with_val(bits, model.a.square_ref()) * pi;
    Float::with_val(model.precision.bits(), (num / den).sqrt())
}

/// Im of the valley-method ground-state correction at eps = 0, in the
/// rescaled frame.
pub fn ground_im_enp(g: &Float, branch: Branch, precision: Precision) -> Result<Float, AsymptoticError> {
    if *g <= 0 {
        return Err(AsymptoticError::NonPositiveCoupling);
    }
    let zero = Float::new(precision.bits());
    let params = WellParams::from_coupling(g, &zero, precision)?;
    let value = nonpert::energy_st(Level::Central { n0: 0 }, &params, branch)?;
    Ok(value.shift_imag)
}

/// The branch under which the ground state's Im E_NP is positive, which
/// makes the dispersion-relation coefficients negative.
pub fn calibrated_branch(precision: Precision) -> Branch {
    let g = Float::with_val(precision.bits(), 0.15);
    match ground_im_enp(&g, Branch::Upper, precision) {
        Ok(im) if im > 0 => Branch::Upper,
        _ => Branch::Lower,
    }
}
