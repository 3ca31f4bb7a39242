//! Regeneration of the four reference tables with per-cell verification.

use std::path::PathBuf;

use rug::ops::Pow;
use rug::{Float, Rational};
use twlab_core::asymptotics::{ratio_table, GroundState};
use twlab_core::bender_wu::{critical_order, partial_sum, RationalSeries, Well};
use twlab_core::nonpert::{self, Formula};
use twlab_core::parallel;
use twlab_core::spectral::{self, BasisConfig, SpectralError};
use twlab_core::{Branch, Precision};

use crate::cache;
use crate::golden::{self, Printed};
use crate::report::{Cell, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableId {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
    #[value(name = "IV")]
    IV,
}

/// Shared run settings for table and command execution.
#[derive(Debug, Clone)]
pub struct Settings {
    pub precision: Precision,
    pub branch: Branch,
    pub cache_dir: PathBuf,
    /// Highest perturbative order any cell may require.
    pub max_order: usize,
    /// Largest oscillator basis the eigensolver may escalate to.
    pub max_basis: usize,
}

pub fn build(id: TableId, omegas: &[Rational], settings: &Settings) -> Result<Report, CliError> {
    let mut report = match id {
        TableId::I => table_i(omegas, settings),
        TableId::II => table_ii(settings)?,
        TableId::III => table_iii(omegas, settings),
        TableId::IV => table_iv(omegas, settings)?,
    };
    report.tally();
    Ok(report)
}

fn sci(x: &Float, digits: usize) -> String {
    format!("{:.*e}", digits.max(1), x)
}

/// Positional notation with `digits` significant digits.
pub fn fixed(x: &Float, digits: usize) -> String {
    let Some(exact) = x.to_rational() else {
        return x.to_string();
    };
    if exact == 0 {
        return "0".into();
    }
    let magnitude = x.clone().abs().log10().floor().to_f64() as i64;
    let places = (digits.max(1) as i64 - 1 - magnitude).max(0) as u32;
    let scaled = exact * Rational::from(rug::Integer::from(10).pow(places));
    let n = rug::Integer::from(scaled.round_ref());
    let sign = if n < 0 { "-" } else { "" };
    let body = n.abs().to_string();
    if places == 0 {
        return format!("{sign}{body}");
    }
    let body = format!("{body:0>width$}", width = places as usize + 1);
    let (int, frac) = body.split_at(body.len() - places as usize);
    format!("{sign}{int}.{frac}")
}

fn check(x: &Float, golden: Option<&str>, shown: String) -> Cell {
    match golden {
        Some(g) => {
            let printed = Printed::parse(g).expect("embedded values parse");
            Cell::checked(shown, g, printed.matches(x))
        }
        None => Cell::plain(shown),
    }
}

fn integer_omega(omega: &Rational) -> Option<u32> {
    if *omega.denom() == 1 {
        omega.numer().to_u32()
    } else {
        None
    }
}

pub fn omega_label(omega: &Rational) -> String {
    match integer_omega(omega) {
        Some(w) => w.to_string(),
        None => format!("{}", omega.to_f64()),
    }
}

fn basis_config(omega: &Rational, settings: &Settings, target: u32) -> BasisConfig {
    let mut config = BasisConfig::for_omega(omega);
    config.precision = settings.precision;
    config.target_digits = target.min(settings.precision.digits().saturating_sub(4)).max(1);
    config.max_basis_size = settings.max_basis;
    config.basis_size = config.basis_size.min(settings.max_basis / 2).max(4);
    config
}

fn spectral_skip(e: &SpectralError) -> String {
    match e {
        SpectralError::NotConverged { .. } => format!("basis budget exceeded ({e})"),
        other => other.to_string(),
    }
}

fn table_i(omegas: &[Rational], settings: &Settings) -> Report {
    let mut report = Report::new(
        "Energy difference between the first and second excited states",
        &["omega", "dE21 exact", "dE21 AL", "AL/exact", "dE21 ST", "ST/exact"],
    );
    let p = settings.precision;
    let rows = parallel::map_slice(omegas, |omega| {
        let golden = integer_omega(omega).and_then(|w| golden::TABLE_I.iter().find(|r| r.0 == w));
        let w = p.from_rational(omega);
        let al = nonpert::delta21(&w, Formula::DiluteGas, p);
        let st = nonpert::delta21(&w, Formula::ValleyMethod, p);
        let mut row = vec![Cell::plain(omega_label(omega))];
        match spectral::delta21_exact(omega, &basis_config(omega, settings, 8)) {
            Ok(ex) => {
                let ratio_al = Float::with_val(p.bits(), &al / &ex.value);
                let ratio_st = Float::with_val(p.bits(), &st / &ex.value);
                row.push(check(&ex.value, golden.map(|g| g.1), sci(&ex.value, 7)));
                row.push(check(&al, golden.map(|g| g.2), sci(&al, 7)));
                row.push(check(&ratio_al, golden.map(|g| g.3), fixed(&ratio_al, 8)));
                row.push(check(&st, golden.map(|g| g.4), sci(&st, 7)));
                row.push(check(&ratio_st, golden.map(|g| g.5), fixed(&ratio_st, 8)));
            }
            Err(e) => {
                let reason = spectral_skip(&e);
                row.push(Cell::skipped(golden.map(|g| g.1), reason.clone()));
                row.push(check(&al, golden.map(|g| g.2), sci(&al, 7)));
                row.push(Cell::skipped(golden.map(|g| g.3), reason.clone()));
                row.push(check(&st, golden.map(|g| g.4), sci(&st, 7)));
                row.push(Cell::skipped(golden.map(|g| g.5), reason));
            }
        }
        row
    });
    report.rows = rows;
    report
}

fn load_series(settings: &Settings, well: Well, order: usize) -> Result<RationalSeries, CliError> {
    let path = settings.cache_dir.join(cache::file_name(well, 0));
    let (series, _) = cache::load_or_generate(&path, well, 0, order)?;
    Ok(series)
}

fn table_ii(settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new(
        "Ratios of exact perturbative coefficients to their large-order prediction",
        &["m", "central ground", "side ground"],
    );
    let p = settings.precision;
    let needed = golden::TABLE_II.iter().map(|r| r.0 as usize).filter(|&m| m <= settings.max_order).max().unwrap_or(0);
    let (central, side) = if needed > 0 {
        let (c, s) = parallel::join(
            || load_series(settings, Well::Central, needed),
            || load_series(settings, Well::Side, needed),
        );
        (Some(c?), Some(s?))
    } else {
        (None, None)
    };
    for (m, gc, gs) in golden::TABLE_II {
        let m = m as usize;
        let mut row = vec![Cell::plain(m.to_string())];
        for (series, state, g) in [(&central, GroundState::Central, gc), (&side, GroundState::Side, gs)] {
            match series {
                Some(s) if m <= s.order() => {
                    let ratio = ratio_table(s, state, &[m], p)?.remove(0);
                    row.push(check(&ratio, Some(g), fixed(&ratio, 14)));
                }
                _ => row.push(Cell::skipped(Some(g), format!("order {m} exceeds --max-order {}", settings.max_order))),
            }
        }
        report.rows.push(row);
    }
    if needed > 0 {
        report.notes.push(format!("coefficients cached in {}", settings.cache_dir.display()));
    }
    Ok(report)
}

fn table_iii(omegas: &[Rational], settings: &Settings) -> Report {
    let mut report =
        Report::new("Predicted perturbative contributions to the ground-state energy", &["omega", "E_P AL", "E_P ST"]);
    let p = settings.precision;
    report.rows = parallel::map_slice(omegas, |omega| {
        let golden = integer_omega(omega).and_then(|w| golden::TABLE_III.iter().find(|r| r.0 == w));
        let mut row = vec![Cell::plain(omega_label(omega))];
        match spectral::eigenvalues(omega, 1, &basis_config(omega, settings, 32)) {
            Ok(levels) => {
                let w = p.from_rational(omega);
                let e0 = &levels[0].value;
                let al = Float::with_val(p.bits(), e0 - nonpert::energy_al(&w, 0, p));
                let st = Float::with_val(p.bits(), e0 - nonpert::ground_energy_st_al_units(&w, p));
                let shown = |g: Option<&str>| {
                    g.map(|s| Printed::parse(s).expect("embedded").significant_digits() + 3).unwrap_or(20)
                };
                row.push(check(&al, golden.map(|g| g.1), fixed(&al, shown(golden.map(|g| g.1)))));
                row.push(check(&st, golden.map(|g| g.2), fixed(&st, shown(golden.map(|g| g.2)))));
            }
            Err(e) => {
                let reason = spectral_skip(&e);
                row.push(Cell::skipped(golden.map(|g| g.1), reason.clone()));
                row.push(Cell::skipped(golden.map(|g| g.2), reason));
            }
        }
        row
    });
    report
}

fn table_iv(omegas: &[Rational], settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new(
        "Partial sums of the ground-state perturbation series",
        &["omega", "M", "sum_{m=1}^{M} omega^{1-m} c^[2m]"],
    );
    let p = settings.precision;
    // m_c ~ omega / 2; a margin lets the minimum be certified as interior
    let max_omega = omegas.iter().map(|w| w.to_f64()).fold(0.0, f64::max);
    let wanted = (max_omega / 2.0).ceil() as usize + 8;
    let order = wanted.min(settings.max_order);
    let series = load_series(settings, Well::Central, order.max(1))?;
    for omega in omegas {
        let golden = integer_omega(omega).and_then(|w| golden::TABLE_IV.iter().find(|r| r.0 == w));
        let w = p.from_rational(omega);
        let g = Float::with_val(p.bits(), w.recip_ref()).sqrt();
        let mc = match critical_order(&series, &g, p) {
            Ok(mc) => mc,
            Err(e) => {
                report.rows.push(vec![
                    Cell::plain(omega_label(omega)),
                    Cell::plain("m_c"),
                    Cell::skipped(
                        None,
                        format!("critical order unavailable within --max-order {}: {e}", settings.max_order),
                    ),
                ]);
                continue;
            }
        };
        if let Some(gw) = golden {
            if mc != (gw.0 / 2) as usize {
                report.notes.push(format!("omega = {}: critical order {mc} differs from omega/2", gw.0));
            }
        }
        for m in mc.saturating_sub(9).max(1)..=mc {
            let label = if m == mc { format!("{m} (m_c)") } else { m.to_string() };
            // reference rows run over M = omega/2 - 9 ..= omega/2
            let reference = golden.and_then(|gw| {
                let first = (gw.0 / 2) as usize - 9;
                m.checked_sub(first).and_then(|i| gw.1.get(i).copied())
            });
            let sum = partial_sum(&series, &w, m, p)?;
            let digits = reference.map(|s| Printed::parse(s).expect("embedded").significant_digits() + 3).unwrap_or(25);
            report.rows.push(vec![
                Cell::plain(omega_label(omega)),
                Cell::plain(label),
                check(&sum, reference, fixed(&sum, digits)),
            ]);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_notation() {
        let f = |s: &str| Float::with_val(200, Float::parse(s).unwrap());
        assert_eq!(fixed(&f("-0.8182519431"), 6), "-0.818252");
        assert_eq!(fixed(&f("0.0012345"), 3), "0.00123");
        assert_eq!(fixed(&f("1234.5"), 2), "1235");
        assert_eq!(fixed(&f("0.9946"), 2), "0.99");
    }
}
