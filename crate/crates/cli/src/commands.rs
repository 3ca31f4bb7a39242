//! The non-table subcommands.

use std::path::Path;

use rug::ops::Pow;
use rug::{Float, Rational};
use twlab_core::bender_wu::{Parity, Well};
use twlab_core::nonpert::{self, energy_st, Formula, Level, WellParams};
use twlab_core::spectral::{self, BasisConfig};
use twlab_core::wkb::{solve_level, WkbLevelSpec};

use crate::cache::{self, CacheOutcome};
use crate::report::{Cell, Report};
use crate::tables::{fixed, omega_label, Settings};
use crate::CliError;

/// Parses "30", "-0.25" or "61/2" exactly.
pub fn parse_decimal(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: rug::Integer = n.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
        let d: rug::Integer = d.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
        if d == 0 {
            return Err(format!("'{text}' has a zero denominator"));
        }
        return Ok(Rational::from((n, d)));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("'{text}' is not a number"));
    }
    let n: rug::Integer = digits.parse().map_err(|_| format!("'{text}' is not a number"))?;
    let d = rug::Integer::from(10).pow(frac_part.len() as u32);
    let r = Rational::from((n, d));
    Ok(if negative { -r } else { r })
}

pub fn parse_omega(text: &str) -> Result<Rational, String> {
    let w = parse_decimal(text)?;
    if w <= 0 {
        return Err(format!("omega must be positive (got {text})"));
    }
    Ok(w)
}

pub fn series(well: Well, state: u32, order: usize, cache_path: &Path) -> Result<Report, CliError> {
    let (series, outcome) = cache::load_or_generate(cache_path, well, state, order)?;
    let title = format!("Perturbative coefficients c^[2m], {} well, state {}", well.as_str(), state);
    let mut report = Report::new(title, &["m", "c^[2m]", "approx"]);
    for (m, c) in series.coefficients().iter().enumerate() {
        let approx = Float::with_val(128, c);
        report.rows.push(vec![
            Cell::plain(m.to_string()),
            Cell::plain(c.to_string()),
            Cell::plain(format!("{approx:.12e}")),
        ]);
    }
    let verb = match outcome {
        CacheOutcome::Hit => "read from",
        CacheOutcome::Extended => "regenerated into",
        CacheOutcome::Created => "written to",
    };
    report.notes.push(format!("cache {verb} {}", cache_path.display()));
    Ok(report)
}

pub fn spectrum(
    omega: &Rational,
    count: usize,
    target_digits: u32,
    basis: Option<usize>,
    settings: &Settings,
) -> Result<Report, CliError> {
    let mut config = BasisConfig::for_omega(omega);
    config.precision = settings.precision;
    config.target_digits = target_digits;
    config.max_basis_size = settings.max_basis;
    if let Some(n) = basis {
        config.basis_size = n;
    }
    let levels = spectral::eigenvalues(omega, count, &config)?;
    let title = format!("Lowest {count} eigenvalues at omega = {}", omega_label(omega));
    let mut report = Report::new(title, &["level", "parity", "energy", "stable digits", "basis"]);
    for lvl in levels {
        let shown = lvl.stable_digits.max(1) as usize;
        report.rows.push(vec![
            Cell::plain(lvl.level.to_string()),
            Cell::plain(lvl.parity.as_str()),
            Cell::plain(fixed(&lvl.value, shown)),
            Cell::plain(lvl.stable_digits.to_string()),
            Cell::plain(lvl.basis_size.to_string()),
        ]);
    }
    report.notes.push(format!("basis frequency {} (rescaled frame)", config.basis_frequency));
    Ok(report)
}

pub fn nonpert(
    omega: &Rational,
    formulas: &[Formula],
    epsilon: &Rational,
    settings: &Settings,
) -> Result<Report, CliError> {
    let p = settings.precision;
    let bits = p.bits();
    let w = p.from_rational(omega);
    let eps = p.from_rational(epsilon);
    let title = format!("Closed-form lowest levels at omega = {}, eps = {}", omega_label(omega), epsilon);
    let mut report = Report::new(title, &["formula", "E0", "E1", "E2", "dE21", "Im E0"]);
    let fmt = |x: &Float| format!("{x:.20e}");
    for &formula in formulas {
        let row = match formula {
            Formula::DiluteGas => {
                if *epsilon != 0 {
                    report.notes.push("dilute-gas formulas are evaluated at eps = 0".into());
                }
                let e: Vec<Float> = (0..3).map(|l| nonpert::energy_al(&w, l, p)).collect();
                let d = nonpert::delta21(&w, formula, p);
                vec![
                    Cell::plain("AL"),
                    Cell::plain(fmt(&e[0])),
                    Cell::plain(fmt(&e[1])),
                    Cell::plain(fmt(&e[2])),
                    Cell::plain(fmt(&d)),
                    Cell::plain("0"),
                ]
            }
            Formula::ValleyMethod => {
                let params = WellParams::from_omega(&w, &eps, p)?;
                let c0 = energy_st(Level::Central { n0: 0 }, &params, settings.branch)?;
                let odd = energy_st(Level::Side { n: 0, parity: Parity::Odd }, &params, settings.branch)?;
                let even = energy_st(Level::Side { n: 0, parity: Parity::Even }, &params, settings.branch)?;
                let scale = |x: &Float| Float::with_val(bits, x * &w);
                let (lower, upper) = if odd.total_real <= even.total_real { (&odd, &even) } else { (&even, &odd) };
                let split = Float::with_val(bits, &upper.shift_real - &lower.shift_real);
                vec![
                    Cell::plain("ST"),
                    Cell::plain(fmt(&scale(&c0.total_real))),
                    Cell::plain(fmt(&scale(&lower.total_real))),
                    Cell::plain(fmt(&scale(&upper.total_real))),
                    Cell::plain(fmt(&scale(&split))),
                    Cell::plain(fmt(&scale(&c0.shift_imag))),
                ]
            }
        };
        report.rows.push(row);
    }
    report.notes.push(format!("branch {}", settings.branch.sign()));
    Ok(report)
}

pub fn wkb(omega: &Rational, epsilon: &Rational, parity: Parity, settings: &Settings) -> Result<Report, CliError> {
    let p = settings.precision;
    let bits = p.guarded_bits();
    let w = p.from_rational(omega);
    let g = Float::with_val(bits, w.recip_ref()).sqrt();
    let eps = Float::with_val(bits, epsilon);
    let specs: Vec<(&str, WkbLevelSpec)> = match parity {
        Parity::Even => vec![
            ("central n0=0", WkbLevelSpec::central(0, &g, &eps, p)?),
            ("side n=0 even", WkbLevelSpec::side(0, Parity::Even, &g, &eps, p)?),
        ],
        Parity::Odd => vec![
            ("side n=0 odd", WkbLevelSpec::side(0, Parity::Odd, &g, &eps, p)?),
            ("central n0=1", WkbLevelSpec::central(1, &g, &eps, p)?),
        ],
        Parity::NotApplicable => return Err(CliError::Usage("wkb needs --parity even or odd".into())),
    };
    let title = format!("WKB roots at omega = {}, eps = {}, {} parity", omega_label(omega), epsilon, parity.as_str());
    let mut report =
        Report::new(title, &["level", "harmonic", "root E", "shift", "omega * shift", "Im residual", "multiple"]);
    for (label, spec) in specs {
        let mut row = vec![Cell::plain(label)];
        match solve_level(&spec, settings.branch) {
            Ok(root) => {
                let scaled = Float::with_val(bits, &root.shift * &w);
                row.extend([
                    Cell::plain(format!("{:.10}", root.harmonic)),
                    Cell::plain(format!("{:.30}", root.energy)),
                    Cell::plain(format!("{:.15e}", root.shift)),
                    Cell::plain(format!("{scaled:.15e}")),
                    Cell::plain(format!("{:.6e}", root.residual_imag)),
                    Cell::plain(if root.multiple_roots { "yes" } else { "no" }),
                ]);
            }
            Err(e) => {
                row.push(Cell::plain(format!("{:.10}", spec.seed_energy)));
                row.extend((0..5).map(|_| Cell::plain("")));
                report.notes.push(format!("{label}: {e}"));
            }
        }
        report.rows.push(row);
    }
    report.notes.push(format!("branch {}", settings.branch.sign()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("30").unwrap(), 30);
        assert_eq!(parse_decimal("-0.25").unwrap(), Rational::from((-1, 4)));
        assert_eq!(parse_decimal("61/2").unwrap(), Rational::from((61, 2)));
        assert!(parse_decimal("3e2").is_err());
        assert!(parse_omega("0").is_err());
    }
}
