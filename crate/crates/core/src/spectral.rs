//! Reference eigenvalues of H(x; omega) = -1/2 d^2/dx^2 + omega^2/2 x^2 (x^2 - 1)^2.
//!
//! The Hamiltonian is rescaled with q = sqrt(omega) x, so that
//! H = omega [ -1/2 d^2/dq^2 + q^2/2 - g^2 q^4 + g^4 q^6 / 2 ] with g^2 = 1/omega,
//! and diagonalised by Rayleigh–Ritz in a harmonic-oscillator basis of
//! frequency `basis_frequency`.  Parity splits the basis into two sectors,
//! each of which is a symmetric band matrix of half-bandwidth three.
//! Eigenvalues are located by bisection on the inertia of H - sigma, read off
//! from a banded LDL^T factorisation (Sylvester's law).

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::bender_wu::Parity;
use crate::nonpert::{self, Formula};
use crate::numerics::{agreeing_digits, Precision};
use crate::parallel;

const BAND: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("omega must be positive")]
    NonPositiveOmega,
    #[error("basis size {0} is below the minimum of 4")]
    BasisTooSmall(usize),
    #[error("at least one level must be requested")]
    NoLevels,
    #[error("level {level} reached {stable} stable digits (target {target}) at the maximum basis size {basis}")]
    NotConverged { level: usize, stable: u32, target: u32, basis: usize },
}

/// Even polynomial potential alpha q^2 + beta q^4 + gamma q^6 added to the
/// kinetic term -1/2 d^2/dq^2.
#[derive(Debug, Clone, PartialEq)]
pub struct SexticPotential {
    pub quadratic: Rational,
    pub quartic: Rational,
    pub sextic: Rational,
}

impl SexticPotential {
    /// q^2 (1 - g^2 q^2)^2 / 2 at g^2 = 1/omega.
    pub fn triple_well(omega: &Rational) -> Self {
        let g2 = Rational::from(omega.recip_ref());
        SexticPotential {
            quadratic: Rational::from((1, 2)),
            quartic: -g2.clone(),
            sextic: Rational::from(g2.square_ref()) / 2u32,
        }
    }

    /// Harmonic potential whose unscaled frequency is `frequency`: in the
    /// rescaled frame its levels are (frequency / omega)(n + 1/2).
    pub fn harmonic(omega: &Rational, frequency: &Rational) -> Self {
        let ratio = Rational::from(frequency / omega);
        SexticPotential {
            quadratic: Rational::from(ratio.square_ref()) / 2u32,
            quartic: Rational::new(),
            sextic: Rational::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    /// Oscillator states n = 0..basis_size (both parities together).
    pub basis_size: usize,
    /// Oscillator frequency of the basis in the rescaled frame.
    pub basis_frequency: Rational,
    pub precision: Precision,
    /// Digits that must survive a doubling of the basis.
    pub target_digits: u32,
    pub max_basis_size: usize,
}

impl BasisConfig {
    /// Defaults sized for the lowest three levels at the given omega.
    pub fn for_omega(omega: &Rational) -> Self {
        let w = omega.to_f64();
        let basis_size = ((2.0 * w + 40.0) as usize).max(40);
        BasisConfig {
            basis_size,
            basis_frequency: default_basis_frequency(omega),
            precision: Precision::default(),
            target_digits: 12,
            max_basis_size: 1200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub level: usize,
    /// Eigenvalue of the unscaled Hamiltonian.
    pub value: Float,
    /// Digits unchanged when the basis is doubled.
    pub stable_digits: u32,
    pub parity: Parity,
    pub basis_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceEstimate {
    pub value: Float,
    pub stable_digits: u32,
    pub basis_size: usize,
}

/// One parity sector: rows[i][d] = H(i, i + d) for d = 0..=3.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    rows: Vec<[Float; BAND + 1]>,
}

impl BandMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&Float> {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        if b - a > BAND || b >= self.dim() {
            None
        } else {
            Some(&self.rows[a][b - a])
        }
    }
}

/// X^k |n) in the basis |n) = sqrt(n!) |n>, where X = a + a^dagger acts as
/// X|n) = |n+1) + n |n-1).  Returned as a map from index to integer weight.
fn x_power_on(n: usize, power: usize) -> Vec<(usize, Integer)> {
    let mut state: Vec<(usize, Integer)> = vec![(n, Integer::from(1))];
    for _ in 0..power {
        let mut next: Vec<(usize, Integer)> = Vec::with_capacity(state.len() * 2);
        let mut push = |idx: usize, w: Integer| {
            if let Some(slot) = next.iter_mut().find(|(i, _)| *i == idx) {
                slot.1 += w;
            } else {
                next.push((idx, w));
            }
        };
        for (idx, w) in &state {
            push(idx + 1, w.clone());
            if *idx > 0 {
                push(idx - 1, Integer::from(w * *idx as u64));
            }
        }
        state = next;
    }
    state
}

fn weight_at(v: &[(usize, Integer)], idx: usize) -> Integer {
    v.iter().find(|(i, _)| *i == idx).map(|(_, w)| w.clone()).unwrap_or_default()
}

/// Rational part and integer radicand of <n+2d| H |n>, so that the matrix
/// element is rational * sqrt(radicand).
fn element_parts(potential: &SexticPotential, frequency: &Rational, n: usize, d: usize) -> (Rational, Integer) {
    let m = n + 2 * d;
    // <m| q^k |n> = (2 Omega)^{-k/2} [X^k|n)]_m sqrt(m!/n!)
    let two_omega = Rational::from(frequency * 2u32);
    let mut coef = Rational::new();
    let terms = [(2usize, &potential.quadratic), (4, &potential.quartic), (6, &potential.sextic)];
    for (power, c) in terms {
        if *c == 0 {
            continue;
        }
        let t = weight_at(&x_power_on(n, power), m);
        if t == 0 {
            continue;
        }
        let scale = Rational::from(Pow::pow(two_omega.clone(), (power / 2) as i32).recip_ref());
        coef += Rational::from(c * t) * scale;
    }
    if d == 0 {
        // kinetic term: Omega (n + 1/2) - Omega^2 q^2 / 2 in the same basis
        let t = weight_at(&x_power_on(n, 2), n);
        let kinetic_q2 = Rational::from(frequency.square_ref()) / 2u32 * t / two_omega.clone();
        coef += frequency * Rational::from((2 * n as u64 + 1, 2u64));
        coef -= kinetic_q2;
    } else if d == 1 {
        let t = weight_at(&x_power_on(n, 2), m);
        let kinetic_q2 = Rational::from(frequency.square_ref()) / 2u32 * t / two_omega.clone();
        coef -= kinetic_q2;
    }
    let mut radicand = Integer::from(1);
    for j in (n + 1)..=m {
        radicand *= j as u64;
    }
    (coef, radicand)
}

/// Assembles one parity sector of dimension `dim` (basis indices 2i + parity).
pub fn assemble_sector(
    potential: &SexticPotential,
    frequency: &Rational,
    parity: u32,
    dim: usize,
    bits: u32,
) -> BandMatrix {
    let rows = parallel::map_range(0, dim, |i| {
        let n = 2 * i + parity as usize;
        std::array::from_fn(|d| {
            if i + d >= dim {
                return Float::new(bits);
            }
            let (coef, radicand) = element_parts(potential, frequency, n, d);
            if coef == 0 {
                return Float::new(bits);
            }
            Float::with_val(bits, &coef) * Float::with_val(bits, &radicand).sqrt()
        })
    });
    BandMatrix { rows }
}

/// Number of eigenvalues strictly below `sigma`.
pub fn count_below(matrix: &BandMatrix, sigma: &Float) -> usize {
    let bits = sigma.prec();
    let n = matrix.dim();
    // l[i][j] = L(i, i - 1 - j) for j < BAND; pivots d[i]
    let mut pivots: Vec<Float> = Vec::with_capacity(n);
    let mut lower: Vec<[Float; BAND]> = Vec::with_capacity(n);
    let tiny = Float::with_val(bits, 1) >> (bits as i32 - 8);
    let mut negatives = 0usize;
    let mut tmp = Float::new(bits);
    for i in 0..n {
        let mut li: [Float; BAND] = std::array::from_fn(|_| Float::new(bits));
        // L(i, j) d_j = A(i, j) - sum_{k<j} L(i,k) L(j,k) d_k
        for j in i.saturating_sub(BAND)..i {
            let mut v = matrix.entry(j, i).cloned().unwrap_or_else(|| Float::new(bits));
            for k in i.saturating_sub(BAND)..j {
                let lik = &li[i - 1 - k];
                let ljk = &lower[j][j - 1 - k];
                tmp.assign_product(lik, ljk);
                tmp *= &pivots[k];
                v -= &tmp;
            }
            v /= &pivots[j];
            li[i - 1 - j] = v;
        }
        let mut d = Float::with_val(bits, &matrix.rows[i][0] - sigma);
        for k in i.saturating_sub(BAND)..i {
            tmp.assign_square(&li[i - 1 - k]);
            tmp *= &pivots[k];
            d -= &tmp;
        }
        if d.is_zero() {
            d = tiny.clone();
        }
        if d.is_sign_negative() {
            negatives += 1;
        }
        pivots.push(d);
        lower.push(li);
    }
    negatives
}

trait AssignOps {
    fn assign_product(&mut self, a: &Float, b: &Float);
    fn assign_square(&mut self, a: &Float);
}

impl AssignOps for Float {
    fn assign_product(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
    fn assign_square(&mut self, a: &Float) {
        use rug::Assign;
        self.assign(a.square_ref());
    }
}

/// Gershgorin interval containing the whole spectrum.
fn gershgorin(matrix: &BandMatrix, bits: u32) -> (Float, Float) {
    let n = matrix.dim();
    let mut lo: Option<Float> = None;
    let mut hi: Option<Float> = None;
    for i in 0..n {
        let mut radius = Float::with_val(bits, 0);
        for j in i.saturating_sub(BAND)..(i + BAND + 1).min(n) {
            if j != i {
                if let Some(e) = matrix.entry(i, j) {
                    radius += e.clone().abs();
                }
            }
        }
        let c = &matrix.rows[i][0];
        let a = Float::with_val(bits, c - &radius);
        let b = Float::with_val(bits, c + &radius);
        if lo.as_ref().is_none_or(|l| a < *l) {
            lo = Some(a);
        }
        if hi.as_ref().is_none_or(|h| b > *h) {
            hi = Some(b);
        }
    }
    (lo.unwrap_or_else(|| Float::new(bits)), hi.unwrap_or_else(|| Float::new(bits)))
}

/// The `index`-th smallest eigenvalue (0-based) by bisection to full width.
pub fn bisect_eigenvalue(matrix: &BandMatrix, index: usize, bits: u32) -> Float {
    let (mut lo, mut hi) = gershgorin(matrix, bits);
    let width_floor = Float::with_val(bits, 1) >> (bits as i32 - 2);
    loop {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            return mid;
        }
        if count_below(matrix, &mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        let width = Float::with_val(bits, &hi - &lo);
        let scale = if hi.clone().abs() > 1 { hi.clone().abs() } else { Float::with_val(bits, 1) };
        if width <= Float::with_val(bits, &width_floor * &scale) {
            return Float::with_val(bits, &lo + &hi) / 2u32;
        }
    }
}

/// Lowest `count` Ritz values of one parity sector in the rescaled frame.
pub fn sector_ritz_values(
    potential: &SexticPotential,
    frequency: &Rational,
    parity: u32,
    dim: usize,
    count: usize,
    bits: u32,
) -> Vec<Float> {
    let matrix = assemble_sector(potential, frequency, parity, dim, bits);
    let idx: Vec<usize> = (0..count.min(dim)).collect();
    parallel::map_slice(&idx, |&k| bisect_eigenvalue(&matrix, k, bits))
}

/// Lowest `count` Ritz values of the full problem at a fixed basis, in the
/// rescaled frame, ascending with parity labels.
pub fn ritz_values(
    potential: &SexticPotential,
    frequency: &Rational,
    basis_size: usize,
    count: usize,
    bits: u32,
) -> Vec<(Float, Parity)> {
    let even_dim = basis_size.div_ceil(2);
    let odd_dim = basis_size / 2;
    let (even, odd) = parallel::join(
        || sector_ritz_values(potential, frequency, 0, even_dim, count, bits),
        || sector_ritz_values(potential, frequency, 1, odd_dim, count, bits),
    );
    let mut all: Vec<(Float, Parity)> =
        even.into_iter().map(|v| (v, Parity::Even)).chain(odd.into_iter().map(|v| (v, Parity::Odd))).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    all.truncate(count);
    all
}

/// Basis frequency minimising the lowest Ritz value on a coarse grid at a
/// small basis.
pub fn default_basis_frequency(omega: &Rational) -> Rational {
    let potential = SexticPotential::triple_well(omega);
    let size = ((omega.to_f64() * 0.8) as usize + 24).max(24);
    let bits = 64;
    let candidates: Vec<Rational> = (2..=12).map(|k| Rational::from((k, 4))).collect();
    let scores = parallel::map_slice(&candidates, |w| ritz_values(&potential, w, size, 1, bits)[0].0.to_f64());
    let best = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(2);
    candidates[best].clone()
}

fn validate(omega: &Rational, count: usize, config: &BasisConfig) -> Result<(), SpectralError> {
    if *omega <= 0 {
        return Err(SpectralError::NonPositiveOmega);
    }
    if config.basis_size < 4 {
        return Err(SpectralError::BasisTooSmall(config.basis_size));
    }
    if count == 0 {
        return Err(SpectralError::NoLevels);
    }
    Ok(())
}

fn working_bits(config: &BasisConfig) -> u32 {
    config.precision.guarded_bits()
}

/// Ritz values at two consecutive basis sizes.
type RitzPair = (Vec<(Float, Parity)>, Vec<(Float, Parity)>);

/// Ritz values at `size` and `2 size`, escalating until `accept` is satisfied
/// or the maximum basis is exceeded.  Returns (coarse, fine, fine_size).
fn escalate<F>(
    potential: &SexticPotential,
    count: usize,
    config: &BasisConfig,
    mut accept: F,
) -> (RitzPair, usize, bool)
where
    F: FnMut(&[(Float, Parity)], &[(Float, Parity)]) -> bool,
{
    let bits = working_bits(config);
    let mut size = config.basis_size;
    let mut coarse = ritz_values(potential, &config.basis_frequency, size, count, bits);
    loop {
        let fine = ritz_values(potential, &config.basis_frequency, 2 * size, count, bits);
        if accept(&coarse, &fine) {
            return ((coarse, fine), 2 * size, true);
        }
        if 4 * size > config.max_basis_size {
            return ((coarse, fine), 2 * size, false);
        }
        size *= 2;
        coarse = fine;
    }
}

fn stable_digits(a: &Float, b: &Float, cap: u32) -> u32 {
    agreeing_digits(a, b, cap)
}

/// Lowest `count` eigenvalues of the unscaled Hamiltonian at `omega`, each
/// certified by `target_digits` agreeing digits under basis doubling.
pub fn eigenvalues(
    omega: &Rational,
    count: usize,
    config: &BasisConfig,
) -> Result<Vec<SpectrumEstimate>, SpectralError> {
    let potential = SexticPotential::triple_well(omega);
    eigenvalues_of(&potential, omega, count, config)
}

/// As [`eigenvalues`] for an arbitrary even sextic potential in the
/// rescaled frame; values are multiplied back by `omega`.
pub fn eigenvalues_of(
    potential: &SexticPotential,
    omega: &Rational,
    count: usize,
    config: &BasisConfig,
) -> Result<Vec<SpectrumEstimate>, SpectralError> {
    validate(omega, count, config)?;
    let cap = config.precision.digits();
    let target = config.target_digits;
    let ((coarse, fine), size, _) = escalate(potential, count, config, |c, f| {
        c.len() == f.len() && c.iter().zip(f).all(|(a, b)| stable_digits(&a.0, &b.0, cap) >= target)
    });
    let bits = config.precision.bits();
    let scale = Float::with_val(bits, omega);
    let mut out = Vec::with_capacity(count);
    for (level, (fine_v, coarse_v)) in fine.iter().zip(coarse.iter()).enumerate() {
        let stable = stable_digits(&fine_v.0, &coarse_v.0, cap);
        if stable < target {
            return Err(SpectralError::NotConverged { level, stable, target, basis: size });
        }
        out.push(SpectrumEstimate {
            level,
            value: Float::with_val(bits, &fine_v.0 * &scale),
            stable_digits: stable,
            parity: fine_v.1,
            basis_size: size,
        });
    }
    Ok(out)
}

/// E_2 - E_1 with the convergence target applied to the difference itself.
pub fn delta21_exact(omega: &Rational, config: &BasisConfig) -> Result<DifferenceEstimate, SpectralError> {
    let potential = SexticPotential::triple_well(omega);
    validate(omega, 3, config)?;
    let cap = config.precision.digits();
    let target = config.target_digits;
    let diff = |v: &[(Float, Parity)]| Float::with_val(v[2].0.prec(), &v[2].0 - &v[1].0);
    let ((coarse, fine), size, _) = escalate(&potential, 3, config, |c, f| {
        c.len() == 3 && f.len() == 3 && stable_digits(&diff(c), &diff(f), cap) >= target
    });
    let (dc, df) = (diff(&coarse), diff(&fine));
    let stable = stable_digits(&dc, &df, cap);
    if stable < target {
        return Err(SpectralError::NotConverged { level: 2, stable, target, basis: size });
    }
    let bits = config.precision.bits();
    Ok(DifferenceEstimate {
        value: Float::with_val(bits, df * Float::with_val(bits, omega)),
        stable_digits: stable,
        basis_size: size,
    })
}

/// E_0^exact(omega) - E_0^formula(omega) for the unscaled Hamiltonian.
pub fn perturbative_remainder(
    omega: &Rational,
    formula: Formula,
    config: &BasisConfig,
) -> Result<Float, SpectralError> {
    let levels = eigenvalues(omega, 1, config)?;
    let p = config.precision;
    let w = p.from_rational(omega);
    let model = match formula {
        Formula::ValleyMethod => nonpert::ground_energy_st_al_units(&w, p),
        Formula::DiluteGas => nonpert::energy_al(&w, 0, p),
    };
    Ok(Float::with_val(p.bits(), &levels[0].value - model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_powers_match_ladder_algebra() {
        // <0|X^2|0> = 1, <2|X^2|0> = sqrt 2 => weight 1 with sqrt(2!/0!)
        let v = x_power_on(0, 2);
        assert_eq!(weight_at(&v, 0), 1);
        assert_eq!(weight_at(&v, 2), 1);
        // <0|X^4|0> = 3
        assert_eq!(weight_at(&x_power_on(0, 4), 0), 3);
        // <1|X^4|1> = 15, i.e. 6 n^2 + 6 n + 3 at n = 1
        assert_eq!(weight_at(&x_power_on(1, 4), 1), 15);
    }

    #[test]
    fn harmonic_self_test_is_exact() {
        let p = Precision::default();
        let omega = Rational::from(30);
        let freq = Rational::from(45);
        let potential = SexticPotential::harmonic(&omega, &freq);
        let config = BasisConfig {
            basis_size: 12,
            basis_frequency: Rational::from(&freq / &omega),
            precision: p,
            target_digits: 45,
            max_basis_size: 48,
        };
        let levels = eigenvalues_of(&potential, &omega, 5, &config).unwrap();
        for (n, lvl) in levels.iter().enumerate() {
            let expect = p.from_rational(&(&freq * Rational::from((2 * n as u64 + 1, 2u64))));
            assert!(agreeing_digits(&lvl.value, &expect, 60) >= 48, "level {n}");
            let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
            assert_eq!(lvl.parity, parity);
        }
    }

    #[test]
    fn inertia_count_brackets_known_spectrum() {
        let omega = Rational::from(1);
        let freq = Rational::from(1);
        let potential = SexticPotential::harmonic(&omega, &freq);
        let m = assemble_sector(&potential, &freq, 0, 10, 128);
        // even sector: 1/2, 5/2, 9/2, ...
        assert_eq!(count_below(&m, &Float::with_val(128, 0.4)), 0);
        assert_eq!(count_below(&m, &Float::with_val(128, 0.6)), 1);
        assert_eq!(count_below(&m, &Float::with_val(128, 4.6)), 3);
    }

    #[test]
    fn invalid_inputs() {
        let omega = Rational::from(30);
        let mut config = BasisConfig::for_omega(&omega);
        assert_eq!(eigenvalues(&Rational::from(-1), 1, &config), Err(SpectralError::NonPositiveOmega));
        assert_eq!(eigenvalues(&omega, 0, &config), Err(SpectralError::NoLevels));
        config.basis_size = 3;
        assert_eq!(eigenvalues(&omega, 1, &config), Err(SpectralError::BasisTooSmall(3)));
    }
}
