mod oracle;

use oracle::{central_oracle, side_oracle};
use rug::Rational;
use twlab_core::bender_wu::{central_series, side_series};

#[test]
fn central_recursion_matches_dense_oracle() {
    for n0 in 0..4u32 {
        let (series, _) = central_series(n0, n0 % 2, 8).unwrap();
        let oracle = central_oracle(n0 as usize, 8);
        assert_eq!(series.coefficients(), &oracle[..], "n0 = {n0}");
    }
}

#[test]
fn side_recursion_matches_dense_oracle() {
    for n in 0..3u32 {
        let (series, _) = side_series(n, 8).unwrap();
        let oracle = side_oracle(n as usize, 8);
        assert_eq!(series.coefficients(), &oracle[..], "n = {n}");
    }
}

#[test]
fn first_order_values_from_oscillator_moments() {
    // <0|-q^4|0> = -3/4 for the unit-frequency ground state
    assert_eq!(central_oracle(0, 1)[1], Rational::from((-3, 4)));
    assert_eq!(side_oracle(0, 1)[1], Rational::from((-15, 8)));
}
