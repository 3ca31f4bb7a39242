//! Published reference values and the digit matcher.
//!
//! A printed value is reproduced when the computed number, cut to the same
//! last decimal place, equals it either by truncation or by rounding: the
//! reference tables end their long entries in an ellipsis (truncated) and
//! their short ones are rounded.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// A printed decimal: sign * digits * 10^scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Printed {
    pub text: String,
    digits: Integer,
    scale: i32,
}

impl Printed {
    /// Accepts "-0.818251", "4.7230e-3" and the like; spaces are ignored.
    pub fn parse(text: &str) -> Result<Printed, String> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (mantissa, exponent) = match cleaned.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|e| format!("bad exponent in '{text}': {e}"))?),
            None => (cleaned.as_str(), 0),
        };
        let (negative, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let all: String = format!("{int_part}{frac_part}");
        if all.is_empty() || !all.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("'{text}' is not a decimal number"));
        }
        let mut digits: Integer = all.parse().map_err(|e| format!("'{text}': {e}"))?;
        if negative {
            digits = -digits;
        }
        let scale = exponent - frac_part.len() as i32;
        Ok(Printed { text: cleaned, digits, scale })
    }

    pub fn value(&self) -> Rational {
        let ten = Rational::from(10);
        Rational::from(&self.digits) * ten.pow(self.scale)
    }

    /// Significant digits as printed.
    pub fn significant_digits(&self) -> usize {
        let s = self.digits.to_string();
        s.trim_start_matches('-').trim_start_matches('0').len().max(1)
    }

    /// Whether `x`, cut to the printed last place by truncation or by
    /// rounding, reproduces the printed digits.
    pub fn matches(&self, x: &Float) -> bool {
        let Some(exact) = x.to_rational() else {
            return false;
        };
        let unit = Rational::from(10).pow(self.scale);
        let scaled = exact / unit;
        let truncated = Integer::from(scaled.trunc_ref());
        let rounded = Integer::from(scaled.round_ref());
        truncated == self.digits || rounded == self.digits
    }
}

pub const OMEGAS: [u32; 5] = [30, 50, 70, 90, 110];

/// Energy difference between the first and second excited states:
/// (omega, exact, dilute-gas, dilute-gas/exact, valley, valley/exact).
pub const TABLE_I: [(u32, &str, &str, &str, &str, &str); 5] = [
    (30, "4.7230e-3", "3.7381e-3", "0.79147", "6.8061e-3", "1.4411"),
    (50, "9.1006e-7", "4.7154e-7", "0.51814", "1.1081e-6", "1.2176"),
    (70, "1.0186e-10", "4.1959e-11", "0.41193", "1.1667e-10", "1.1454"),
    (90, "8.9504e-15", "3.1490e-15", "0.35183", "9.9282e-15", "1.1092"),
    (110, "6.8449e-19", "2.1356e-19", "0.31201", "7.4439e-19", "1.0875"),
];

/// Ratios of exact to predicted large-order coefficients:
/// (m, central ground, side ground).
pub const TABLE_II: [(u32, &str, &str); 15] = [
    (20, "0.8946472445", "0.7797002850"),
    (40, "0.9493285320", "0.8904365552"),
    (60, "0.9665686152", "0.9268736279"),
    (80, "0.9750492671", "0.9451085558"),
    (100, "0.9800964967", "0.9560611732"),
    (120, "0.9834448543", "0.9633690036"),
    (140, "0.9858286759", "0.9685922139"),
    (160, "0.9876123158", "0.9725115700"),
    (180, "0.9889971178", "0.9755611660"),
    (200, "0.9901034160", "0.9780016290"),
    (220, "0.9910075563", "0.9799989041"),
    (240, "0.9917603143", "0.9816636733"),
    (260, "0.9923967744", "0.9830725934"),
    (280, "0.9929419564", "0.9842804381"),
    (300, "0.9934141831", "0.9853273870"),
];

/// Ground-state perturbative remainders: (omega, dilute-gas, valley).
pub const TABLE_III: [(u32, &str, &str); 5] = [
    (30, "-0.818251", "-0.821854"),
    (50, "-0.7883965537", "-0.7883970101"),
    (70, "-0.776334145610396", "-0.776334145651123"),
    (90, "-0.7700548367611102506", "-0.7700548367611133127"),
    (110, "-0.7661975631223371558989", "-0.7661975631223371561068"),
];

/// Partial sums of the ground-state series, M = m_c - 9 ..= m_c with
/// m_c = omega / 2: (omega, [values]).
pub const TABLE_IV: [(u32, [&str; 10]); 5] = [
    (
        30,
        [
            "-0.821307",
            "-0.821522",
            "-0.821641",
            "-0.821714",
            "-0.821764",
            "-0.821800",
            "-0.821830",
            "-0.821856",
            "-0.821880",
            "-0.821903",
        ],
    ),
    (
        50,
        [
            "-0.7883969801",
            "-0.7883969881",
            "-0.7883969939",
            "-0.7883969983",
            "-0.7883970018",
            "-0.7883970047",
            "-0.7883970072",
            "-0.7883970095",
            "-0.7883970118",
            "-0.7883970140",
        ],
    ),
    (
        70,
        [
            "-0.776334145649363",
            "-0.776334145649752",
            "-0.776334145650061",
            "-0.776334145650315",
            "-0.776334145650532",
            "-0.776334145650723",
            "-0.776334145650897",
            "-0.776334145651060",
            "-0.776334145651217",
            "-0.776334145651373",
        ],
    ),
    (
        90,
        [
            "-0.7700548367611132120",
            "-0.7700548367611132318",
            "-0.7700548367611132485",
            "-0.7700548367611132628",
            "-0.7700548367611132755",
            "-0.7700548367611132871",
            "-0.7700548367611132978",
            "-0.7700548367611133080",
            "-0.7700548367611133179",
            "-0.7700548367611133277",
        ],
    ),
    (
        110,
        [
            "-0.7661975631223371561012",
            "-0.7661975631223371561022",
            "-0.7661975631223371561031",
            "-0.7661975631223371561039",
            "-0.7661975631223371561046",
            "-0.7661975631223371561053",
            "-0.7661975631223371561059",
            "-0.7661975631223371561065",
            "-0.7661975631223371561071",
            "-0.7661975631223371561077",
        ],
    ),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Float {
        Float::with_val(200, Float::parse(s).unwrap())
    }

    #[test]
    fn parses_plain_and_scientific() {
        let p = Printed::parse("4.7230e-3").unwrap();
        assert_eq!(p.value(), Rational::from((47230, 10_000_000)));
        assert_eq!(p.significant_digits(), 5);
        let q = Printed::parse("-0.8 18251").unwrap();
        assert_eq!(q.text, "-0.818251");
        assert!(Printed::parse("1.2.3").is_err());
    }

    #[test]
    fn truncation_or_rounding() {
        let p = Printed::parse("-0.821854").unwrap();
        assert!(p.matches(&f("-0.8218549")));
        assert!(p.matches(&f("-0.8218536")));
        assert!(!p.matches(&f("-0.8218530")));
        assert!(!p.matches(&f("-0.8218560")));
        let r = Printed::parse("1.0186e-10").unwrap();
        assert!(r.matches(&f("1.018592e-10")));
        assert!(!r.matches(&f("1.018449e-10")));
    }

    #[test]
    fn embedded_values_parse() {
        for row in TABLE_I {
            for s in [row.1, row.2, row.3, row.4, row.5] {
                Printed::parse(s).unwrap();
            }
        }
        for row in TABLE_IV {
            for s in row.1 {
                Printed::parse(s).unwrap();
            }
        }
    }
}
