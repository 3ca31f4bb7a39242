//! Exact Rayleigh–Schrödinger series around the harmonic minima of
//! H = -1/2 d^2/dq^2 + 1/2 q^2 (1 - g^2 q^2)^2.
//!
//! Central well: H = -1/2 d^2 + q^2/2 - g^2 q^4 + g^4 q^6 / 2 with the ansatz
//! psi = e^{-q^2/2} sum_k g^{2k} sum_l a_l^[k] q^{2l+P}.
//!
//! Side well (origin shifted to q = 1/g):
//! H = -1/2 d^2 + 2 q^2 + 6 g q^3 + 13/2 g^2 q^4 + 3 g^3 q^5 + g^4 q^6 / 2
//! with psi = e^{-q^2} sum_k g^k sum_l a_l^[k] q^l.  Energy corrections of odd order in g are generated
//! like all others and checked to vanish.
//!
//! Every order is closed by intermediate normalization: the coefficient of
//! the unperturbed state's leading power is zero for k > 0, and the energy
//! correction is whatever makes the recursion solvable at that index.

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::numerics::Precision;
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenderWuError {
    #[error("state {state} is not compatible with parity class {parity}")]
    IncompatibleParity { state: u32, parity: u32 },
    #[error("truncation order {requested} exceeds the computed order {available}")]
    TruncationExceedsOrder { requested: usize, available: usize },
    #[error("minimum term sits at the last computed order {order}; series too short to certify it")]
    BoundaryMinimum { order: usize },
    #[error("odd-order side-well energy coefficient c^[{order}] is {value}, expected zero")]
    OddCoefficientNonzero { order: usize, value: String },
    #[error("coupling must be positive")]
    NonPositiveCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Well {
    Central,
    Side,
}

impl Well {
    pub fn as_str(self) -> &'static str {
        match self {
            Well::Central => "central",
            Well::Side => "side",
        }
    }
}

impl std::str::FromStr for Well {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central" => Ok(Well::Central),
            "side" => Ok(Well::Side),
            other => Err(format!("unknown well '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    NotApplicable,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::NotApplicable => "n/a",
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            "n/a" | "none" => Ok(Parity::NotApplicable),
            other => Err(format!("unknown parity '{other}'")),
        }
    }
}

/// Energy coefficients c^[2m], m = 0..=order, of one state of one well.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSeries {
    pub well: Well,
    pub state_index: u32,
    pub parity: Parity,
    coefficients: Vec<Rational>,
}

impl RationalSeries {
    pub fn new(well: Well, state_index: u32, parity: Parity, coefficients: Vec<Rational>) -> Self {
        assert!(!coefficients.is_empty(), "a series carries at least c^[0]");
        RationalSeries { well, state_index, parity, coefficients }
    }

    /// Highest computed m.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// c^[2m].
    pub fn coefficient(&self, m: usize) -> &Rational {
        &self.coefficients[m]
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// The same series cut back to `order`.
    pub fn truncated(&self, order: usize) -> RationalSeries {
        let keep = order.min(self.order());
        RationalSeries { coefficients: self.coefficients[..=keep].to_vec(), ..self.clone() }
    }
}

/// Wave-function coefficients a_l^[k].  Central tables are indexed by the
/// order in g^2 and by l for the power 2l+P; side tables by the order in g
/// and the power l itself.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveCoefficientTable {
    pub well: Well,
    pub state_index: u32,
    entries: Vec<Vec<Rational>>,
}

impl WaveCoefficientTable {
    /// Number of perturbative orders stored (including k = 0).
    pub fn orders(&self) -> usize {
        self.entries.len()
    }

    /// a_l^[k], zero outside the stored triangle.
    pub fn get(&self, k: usize, l: usize) -> Rational {
        self.entries.get(k).and_then(|row| row.get(l)).cloned().unwrap_or_default()
    }

    pub fn row(&self, k: usize) -> &[Rational] {
        &self.entries[k]
    }

    /// Largest power index with a possibly nonzero entry at order k.
    pub fn l_max(&self, k: usize) -> usize {
        self.entries[k].len() - 1
    }
}

fn at(row: &[Rational], l: isize) -> Option<&Rational> {
    if l < 0 {
        None
    } else {
        row.get(l as usize)
    }
}

/// sum_{m=1}^{upto} c[m] * rows[k - m][l], skipping entries outside each row.
fn convolution(coeffs: &[Rational], rows: &[Vec<Rational>], k: usize, l: usize, step: usize, upto: usize) -> Rational {
    let mut acc = Rational::new();
    let mut prod = Rational::new();
    let mut m = step;
    while m <= upto {
        let c = &coeffs[m];
        if *c != 0 {
            if let Some(a) = rows[k - m].get(l) {
                if *a != 0 {
                    prod.assign_mul(c, a);
                    acc += &prod;
                }
            }
        }
        m += step;
    }
    acc
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Rational, b: &Rational);
}

impl AssignMul for Rational {
    fn assign_mul(&mut self, a: &Rational, b: &Rational) {
        use rug::Assign;
        self.assign(a * b);
    }
}

/// Unperturbed central-well polynomial with leading coefficient one.
fn central_seed(half_power: usize, parity: u32) -> Vec<Rational> {
    let mut a = vec![Rational::new(); half_power + 1];
    a[half_power] = Rational::from(1);
    for l in (0..half_power).rev() {
        // 4(l - L0) a_l = (2l+2+P)(2l+1+P) a_{l+1}
        let up = Integer::from((2 * l + 2) as u32 + parity) * ((2 * l + 1) as u32 + parity);
        let denom = Integer::from(4) * (l as i64 - half_power as i64);
        a[l] = Rational::from(&a[l + 1] * up) / denom;
    }
    a
}

/// Unperturbed side-well polynomial (Hermite in sqrt 2 q) with leading
/// coefficient one.
fn side_seed(state: usize) -> Vec<Rational> {
    let mut a = vec![Rational::new(); state + 1];
    a[state] = Rational::from(1);
    let mut l = state;
    while l >= 2 {
        // 4(l' - n) a_{l'} = (l'+2)(l'+1) a_{l'+2}, l' = l - 2
        let lp = l - 2;
        let up = Integer::from((lp + 2) as u32) * ((lp + 1) as u32);
        let denom = Integer::from(4) * (lp as i64 - state as i64);
        a[lp] = Rational::from(&a[l] * up) / denom;
        l -= 2;
    }
    a
}

/// Series and wave table around the central well.  `parity` is the class
/// P of the state (n0 = 2 floor(n0/2) + P).
pub fn central_series(
    n0: u32,
    parity: u32,
    max_order: usize,
) -> Result<(RationalSeries, WaveCoefficientTable), BenderWuError> {
    if parity > 1 || n0 % 2 != parity {
        return Err(BenderWuError::IncompatibleParity { state: n0, parity });
    }
    let half = (n0 / 2) as usize;
    let seed = central_seed(half, parity);
    let mut rows: Vec<Vec<Rational>> = vec![seed.clone()];
    let mut coeffs: Vec<Rational> = vec![Rational::from((2 * n0 + 1, 2))];

    for k in 1..=max_order {
        let l_max = half + 2 * k;
        let rhs: Vec<Rational> = parallel::map_range(0, l_max + 1, |l| {
            let li = l as isize;
            let mut r = Rational::new();
            if let Some(a) = at(&rows[k - 1], li - 2) {
                r += Rational::from(a * 2u32);
            }
            if k >= 2 {
                if let Some(a) = at(&rows[k - 2], li - 3) {
                    r -= a;
                }
            }
            r + convolution(&coeffs, &rows, k, l, 1, k - 1) * 2u32
        });

        let mut row = vec![Rational::new(); l_max + 1];
        let mut ck = Rational::new();
        let mut above = Rational::new();
        for l in (0..=l_max).rev() {
            let up = Integer::from((2 * l + 2) as u32 + parity) * ((2 * l + 1) as u32 + parity);
            let mut lifted = Rational::from(&above * &up);
            lifted += &rhs[l];
            if l == half {
                // solvability fixes the energy correction
                ck = -lifted / Rational::from(&seed[half] * 2u32);
                row[l] = Rational::new();
            } else {
                if l < half {
                    lifted += Rational::from(&ck * &seed[l]) * 2u32;
                }
                row[l] = lifted / (Integer::from(4) * (l as i64 - half as i64));
            }
            above = row[l].clone();
        }
        coeffs.push(ck);
        rows.push(row);
    }

    let p = if parity == 0 { Parity::Even } else { Parity::Odd };
    let series = RationalSeries::new(Well::Central, n0, p, coeffs);
    let table = WaveCoefficientTable { well: Well::Central, state_index: n0, entries: rows };
    Ok((series, table))
}

/// Series and wave table around the side well for state `n`, up to c^[2M].
pub fn side_series(n: u32, max_order: usize) -> Result<(RationalSeries, WaveCoefficientTable), BenderWuError> {
    side_series_signed(n, max_order, 1)
}

/// `sign` selects the expansion point q = +1/g (+1) or q = -1/g (-1); the
/// odd terms of the shifted potential change sign.
pub(crate) fn side_series_signed(
    n: u32,
    max_order: usize,
    sign: i32,
) -> Result<(RationalSeries, WaveCoefficientTable), BenderWuError> {
    let state = n as usize;
    let seed = side_seed(state);
    let mut rows: Vec<Vec<Rational>> = vec![seed.clone()];
    // c^[j] for every order j in g
    let mut all: Vec<Rational> = vec![Rational::from(2 * n + 1)];
    let g_orders = 2 * max_order;

    for k in 1..=g_orders {
        let l_max = state + 3 * k;
        let rhs: Vec<Rational> = parallel::map_range(0, l_max + 1, |l| {
            let li = l as isize;
            let mut r = Rational::new();
            if let Some(a) = at(&rows[k - 1], li - 3) {
                r -= Rational::from(a * (12 * sign));
            }
            if k >= 2 {
                if let Some(a) = at(&rows[k - 2], li - 4) {
                    r -= Rational::from(a * 13u32);
                }
            }
            if k >= 3 {
                if let Some(a) = at(&rows[k - 3], li - 5) {
                    r -= Rational::from(a * (6 * sign));
                }
            }
            if k >= 4 {
                if let Some(a) = at(&rows[k - 4], li - 6) {
                    r -= a;
                }
            }
            r + convolution(&all, &rows, k, l, 1, k - 1) * 2u32
        });

        let mut row = vec![Rational::new(); l_max + 1];
        let mut ck = Rational::new();
        for l in (0..=l_max).rev() {
            let mut lifted = rhs[l].clone();
            if let Some(a2) = row.get(l + 2) {
                lifted += Rational::from(a2 * Integer::from(((l + 2) * (l + 1)) as u64));
            }
            if l == state {
                ck = -lifted / Rational::from(&seed[state] * 2u32);
                row[l] = Rational::new();
            } else {
                if l < state {
                    lifted += Rational::from(&ck * &seed[l]) * 2u32;
                }
                row[l] = lifted / (Integer::from(4) * (l as i64 - state as i64));
            }
        }
        all.push(ck);
        rows.push(row);
    }

    let mut coeffs = Vec::with_capacity(max_order + 1);
    for (j, c) in all.into_iter().enumerate() {
        if j % 2 == 1 {
            if c != 0 {
                return Err(BenderWuError::OddCoefficientNonzero { order: j, value: c.to_string() });
            }
        } else {
            coeffs.push(c);
        }
    }
    let series = RationalSeries::new(Well::Side, n, Parity::NotApplicable, coeffs);
    let table = WaveCoefficientTable { well: Well::Side, state_index: n, entries: rows };
    Ok((series, table))
}

/// Exact residual of the central recursion at (k, l), all terms moved to
/// one side.  Zero for a consistent table.
pub fn central_residual(series: &RationalSeries, table: &WaveCoefficientTable, k: usize, l: usize) -> Rational {
    let p = match series.parity {
        Parity::Odd => 1u32,
        _ => 0u32,
    };
    let a = |kk: isize, ll: isize| -> Rational {
        if kk < 0 || ll < 0 {
            Rational::new()
        } else {
            table.get(kk as usize, ll as usize)
        }
    };
    let (ki, li) = (k as isize, l as isize);
    let mut lhs = a(ki, li) * Integer::from(4 * l as u32 + 1 + 2 * p);
    lhs -= a(ki, li + 1) * (Integer::from(2 * l as u32 + 2 + p) * (2 * l as u32 + 1 + p));
    lhs -= a(ki - 1, li - 2) * 2u32;
    lhs += a(ki - 2, li - 3);
    let mut rhs = Rational::new();
    for m in 0..=k {
        rhs += (series.coefficient(m) * a(ki - m as isize, li)) * 2u32;
    }
    lhs - rhs
}

/// Exact residual of the side recursion at (k, l); `energies` holds c^[j]
/// for every order j in g (odd ones included).
pub fn side_residual(energies: &[Rational], table: &WaveCoefficientTable, k: usize, l: usize) -> Rational {
    let a = |kk: isize, ll: isize| -> Rational {
        if kk < 0 || ll < 0 {
            Rational::new()
        } else {
            table.get(kk as usize, ll as usize)
        }
    };
    let (ki, li) = (k as isize, l as isize);
    let mut lhs = a(ki, li) * Integer::from(4 * l as u64 + 2);
    lhs -= a(ki, li + 2) * Integer::from(((l + 2) * (l + 1)) as u64);
    lhs += a(ki - 1, li - 3) * 12u32;
    lhs += a(ki - 2, li - 4) * 13u32;
    lhs += a(ki - 3, li - 5) * 6u32;
    lhs += a(ki - 4, li - 6);
    let mut rhs = Rational::new();
    for (j, e) in energies.iter().enumerate().take(k + 1) {
        rhs += (e * a(ki - j as isize, li)) * 2u32;
    }
    lhs - rhs
}

/// Interleaves zero odd-order coefficients back into a side series.
pub fn side_energies_all_orders(series: &RationalSeries) -> Vec<Rational> {
    let mut out = Vec::with_capacity(2 * series.order() + 1);
    for (m, c) in series.coefficients().iter().enumerate() {
        if m > 0 {
            out.push(Rational::new());
        }
        out.push(c.clone());
    }
    out
}

fn check_truncation(series: &RationalSeries, order: usize) -> Result<(), BenderWuError> {
    if order > series.order() {
        return Err(BenderWuError::TruncationExceedsOrder { requested: order, available: series.order() });
    }
    Ok(())
}

/// sum_{m=1}^{M} omega^{1-m} c^[2m], each term rounded once and summed at
/// the context precision.
pub fn partial_sum(
    series: &RationalSeries,
    omega: &Float,
    order: usize,
    precision: Precision,
) -> Result<Float, BenderWuError> {
    check_truncation(series, order)?;
    let bits = precision.guarded_bits();
    let inv = Float::with_val(bits, omega.recip_ref());
    let mut weight = Float::with_val(bits, 1);
    let mut sum = Float::with_val(bits, 0);
    for m in 1..=order {
        sum += Float::with_val(bits, series.coefficient(m)) * &weight;
        weight *= &inv;
    }
    Ok(Float::with_val(precision.bits(), sum))
}

/// The same partial sum in exact arithmetic for rational omega.
pub fn partial_sum_exact(series: &RationalSeries, omega: &Rational, order: usize) -> Result<Rational, BenderWuError> {
    check_truncation(series, order)?;
    let inv = Rational::from(omega.recip_ref());
    let mut weight = Rational::from(1);
    let mut sum = Rational::new();
    for m in 1..=order {
        sum += Rational::from(series.coefficient(m) * &weight);
        weight *= &inv;
    }
    Ok(sum)
}

/// |g^{2m} c^[2m]| for m = 1..=order.
pub fn term_magnitudes(series: &RationalSeries, g: &Float, precision: Precision) -> Vec<Float> {
    let bits = precision.guarded_bits();
    let g2 = Float::with_val(bits, g.square_ref());
    let mut weight = Float::with_val(bits, 1);
    let mut out = Vec::with_capacity(series.order());
    for m in 1..=series.order() {
        weight *= &g2;
        out.push(Float::with_val(bits, series.coefficient(m)).abs() * &weight);
    }
    out
}

/// Order m_c minimising |g^{2m} c^[2m]| over 1 <= m <= order, ties going to
/// the smaller m.
pub fn critical_order(series: &RationalSeries, g: &Float, precision: Precision) -> Result<usize, BenderWuError> {
    if *g <= 0 {
        return Err(BenderWuError::NonPositiveCoupling);
    }
    let terms = term_magnitudes(series, g, precision);
    let mut best = 0usize;
    for (i, t) in terms.iter().enumerate().skip(1) {
        if *t < terms[best] {
            best = i;
        }
    }
    let m = best + 1;
    if m == series.order() {
        return Err(BenderWuError::BoundaryMinimum { order: m });
    }
    Ok(m)
}

/// |g^{2 m_c} c^[2 m_c]|.
pub fn min_term_magnitude(series: &RationalSeries, g: &Float, precision: Precision) -> Result<Float, BenderWuError> {
    let mc = critical_order(series, g, precision)?;
    let terms = term_magnitudes(series, g, precision);
    Ok(Float::with_val(precision.bits(), &terms[mc - 1]))
}
