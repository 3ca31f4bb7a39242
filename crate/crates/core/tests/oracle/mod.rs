//! Dense Rayleigh–Schrödinger perturbation theory in an unnormalised
//! Hermite basis h_n(u) = H_n(u) e^{-u^2/2}, where u h_n = h_{n+1}/2 + n h_{n-1}
//! and every matrix element is rational.  Used as an independent route to
//! the recursion coefficients for low orders.

use rug::{Integer, Rational};

type Vector = Vec<Rational>;

fn apply_u(x: &Vector) -> Vector {
    let mut y = vec![Rational::new(); x.len() + 1];
    for (n, xn) in x.iter().enumerate() {
        if *xn == 0 {
            continue;
        }
        y[n + 1] += Rational::from(xn / 2u32);
        if n > 0 {
            y[n - 1] += Rational::from(xn * Integer::from(n));
        }
    }
    y
}

fn apply_power(x: &Vector, power: usize) -> Vector {
    (0..power).fold(x.clone(), |acc, _| apply_u(&acc))
}

fn axpy(y: &mut Vector, a: &Rational, x: &Vector) {
    if y.len() < x.len() {
        y.resize(x.len(), Rational::new());
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += Rational::from(a * xi);
    }
}

/// Energy coefficients e_0..e_K of H0 + sum_i lambda^i V_i where
/// H0 h_n = (spacing n + offset) h_n and V_i = coef_i u^{power_i}.
pub fn rayleigh_schroedinger(
    state: usize,
    spacing: i64,
    offset: Rational,
    perturbations: &[(usize, Rational, usize)],
    orders: usize,
) -> Vec<Rational> {
    let mut psi: Vec<Vector> = vec![{
        let mut v = vec![Rational::new(); state + 1];
        v[state] = Rational::from(1);
        v
    }];
    let mut energies = vec![Rational::from(Integer::from(spacing * state as i64)) + offset];
    for k in 1..=orders {
        let mut w: Vector = Vec::new();
        for (order, coef, power) in perturbations {
            if *order <= k {
                axpy(&mut w, coef, &apply_power(&psi[k - order], *power));
            }
        }
        let ek = w.get(state).cloned().unwrap_or_default();
        for j in 1..k {
            axpy(&mut w, &Rational::from(-&energies[j]), &psi[k - j]);
        }
        let mut next = vec![Rational::new(); w.len()];
        for (n, wn) in w.iter().enumerate() {
            if n != state {
                next[n] = Rational::from(wn / Integer::from(spacing * (state as i64 - n as i64)));
            }
        }
        energies.push(ek);
        psi.push(next);
    }
    energies
}

pub fn central_oracle(n0: usize, orders: usize) -> Vec<Rational> {
    // H = H0 - g^2 q^4 + g^4 q^6 / 2
    let perturbations = [(1, Rational::from(-1), 4), (2, Rational::from((1, 2)), 6)];
    rayleigh_schroedinger(n0, 1, Rational::from((1, 2)), &perturbations, orders)
}

pub fn side_oracle(n: usize, m_orders: usize) -> Vec<Rational> {
    // with u = sqrt2 q and g = sqrt2 h:
    // H = 2 (n + 1/2) + 3 h u^3 + 13/4 h^2 u^4 + 3/2 h^3 u^5 + 1/4 h^4 u^6
    let perturbations = [
        (1, Rational::from(3), 3),
        (2, Rational::from((13, 4)), 4),
        (3, Rational::from((3, 2)), 5),
        (4, Rational::from((1, 4)), 6),
    ];
    let e = rayleigh_schroedinger(n, 2, Rational::from(1), &perturbations, 2 * m_orders);
    for (j, ej) in e.iter().enumerate() {
        if j % 2 == 1 {
            assert_eq!(*ej, 0, "odd oracle coefficient at order {j}");
        }
    }
    // c^[2m] = e_{2m} / 2^m
    e.iter().step_by(2).enumerate().map(|(m, ej)| Rational::from(ej / (Integer::from(1) << m as u32))).collect()
}
