//! Plain-text cache of exact perturbative coefficients.
//!
//! ```text
//! twlab-coefficients
//! version 1
//! well central
//! state 0
//! parity even
//! max_order 3
//! harmonic 1 2
//! checksum <sha256 hex>
//! 1 -3 4
//! 2 -111 16
//! 3 -... ...
//! ```
//!
//! Records hold m, numerator and denominator of c^[2m] in decimal.  The
//! checksum covers the generator identity, the state and every record, so
//! an edited or truncated file and a file written for another state are
//! both rejected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rug::{Integer, Rational};
use sha2::{Digest, Sha256};
use thiserror::Error;
use twlab_core::bender_wu::{central_series, side_series, BenderWuError, Parity, RationalSeries, Well};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "twlab-coefficients";
const GENERATOR: &str = "twlab-bender-wu/1";

/// Serializes cache writes within the process.
static WRITE_LOCK: Mutex<()> = Mutex::new(());

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a coefficient cache")]
    NotACache { path: PathBuf },
    #[error("{path}: unsupported cache format version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { path: PathBuf, found: String },
    #[error("{path}: malformed line {line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error("{path}: checksum mismatch (file is corrupted or was edited)")]
    ChecksumMismatch { path: PathBuf },
    #[error("{path}: cache holds {found}, requested {requested}")]
    StateMismatch { path: PathBuf, found: String, requested: String },
    #[error(transparent)]
    Series(#[from] BenderWuError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.to_path_buf(), source }
}

/// Directory from `TWLAB_CACHE_DIR`, falling back to a folder under the
/// system temporary directory.
pub fn default_dir() -> PathBuf {
    match std::env::var_os("TWLAB_CACHE_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => std::env::temp_dir().join("twlab-cache"),
    }
}

pub fn file_name(well: Well, state: u32) -> String {
    format!("{}-{}.twc", well.as_str(), state)
}

fn describe(well: Well, state: u32, parity: Parity) -> String {
    format!("{} state {} ({})", well.as_str(), state, parity.as_str())
}

/// Hex SHA-256 over the generator identity, state header and records.
pub fn checksum(series: &RationalSeries) -> String {
    let mut h = Sha256::new();
    h.update(format!("generator={GENERATOR}\n"));
    h.update(format!(
        "well={}\nstate={}\nparity={}\nmax_order={}\n",
        series.well.as_str(),
        series.state_index,
        series.parity.as_str(),
        series.order()
    ));
    for (m, c) in series.coefficients().iter().enumerate() {
        h.update(format!("{m} {} {}\n", c.numer(), c.denom()));
    }
    hex::encode(h.finalize())
}

pub fn render(series: &RationalSeries) -> String {
    let mut out = String::new();
    let c0 = series.coefficient(0);
    out.push_str(&format!("{MAGIC}\nversion {FORMAT_VERSION}\n"));
    out.push_str(&format!("well {}\n", series.well.as_str()));
    out.push_str(&format!("state {}\n", series.state_index));
    out.push_str(&format!("parity {}\n", series.parity.as_str()));
    out.push_str(&format!("max_order {}\n", series.order()));
    out.push_str(&format!("harmonic {} {}\n", c0.numer(), c0.denom()));
    out.push_str(&format!("checksum {}\n", checksum(series)));
    for (m, c) in series.coefficients().iter().enumerate().skip(1) {
        out.push_str(&format!("{m} {} {}\n", c.numer(), c.denom()));
    }
    out
}

fn parse_rational(path: &Path, line: usize, num: &str, den: &str) -> Result<Rational, CacheError> {
    let bad = |reason: String| CacheError::Malformed { path: path.to_path_buf(), line, reason };
    let n: Integer = num.parse().map_err(|e| bad(format!("numerator: {e}")))?;
    let d: Integer = den.parse().map_err(|e| bad(format!("denominator: {e}")))?;
    if d <= 0 {
        return Err(bad("denominator must be positive".into()));
    }
    let r = Rational::from((n.clone(), d.clone()));
    if *r.numer() != n || *r.denom() != d {
        return Err(bad("fraction is not in lowest terms".into()));
    }
    Ok(r)
}

pub fn parse(path: &Path, text: &str) -> Result<RationalSeries, CacheError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let malformed =
        |line: usize, reason: &str| CacheError::Malformed { path: path.to_path_buf(), line, reason: reason.into() };
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(CacheError::NotACache { path: path.to_path_buf() }),
    }
    let mut field = |key: &str| -> Result<(usize, String), CacheError> {
        let (no, line) = lines.next().ok_or_else(|| malformed(0, "truncated header"))?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| malformed(no, &format!("expected '{key}'")))?;
        Ok((no, rest.to_string()))
    };
    let (_, version) = field("version")?;
    if version != FORMAT_VERSION.to_string() {
        return Err(CacheError::UnsupportedVersion { path: path.to_path_buf(), found: version });
    }
    let (no, well) = field("well")?;
    let well: Well = well.parse().map_err(|e: String| malformed(no, &e))?;
    let (no, state) = field("state")?;
    let state: u32 = state.parse().map_err(|_| malformed(no, "state must be a non-negative integer"))?;
    let (no, parity) = field("parity")?;
    let parity: Parity = parity.parse().map_err(|e: String| malformed(no, &e))?;
    let (no, max_order) = field("max_order")?;
    let max_order: usize = max_order.parse().map_err(|_| malformed(no, "max_order must be a non-negative integer"))?;
    let (no, harmonic) = field("harmonic")?;
    let parts: Vec<&str> = harmonic.split(' ').collect();
    if parts.len() != 2 {
        return Err(malformed(no, "harmonic needs numerator and denominator"));
    }
    let c0 = parse_rational(path, no, parts[0], parts[1])?;
    let (_, stored) = field("checksum")?;

    let mut coefficients = vec![c0];
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 {
            return Err(malformed(no, "record needs m, numerator, denominator"));
        }
        let m: usize = parts[0].parse().map_err(|_| malformed(no, "order is not an integer"))?;
        if m != coefficients.len() {
            return Err(malformed(no, &format!("expected order {}, found {m}", coefficients.len())));
        }
        coefficients.push(parse_rational(path, no, parts[1], parts[2])?);
    }
    if coefficients.len() != max_order + 1 {
        return Err(malformed(
            0,
            &format!("header announces order {max_order}, file holds {}", coefficients.len() - 1),
        ));
    }
    let series = RationalSeries::new(well, state, parity, coefficients);
    if checksum(&series) != stored {
        return Err(CacheError::ChecksumMismatch { path: path.to_path_buf() });
    }
    Ok(series)
}

pub fn read(path: &Path) -> Result<RationalSeries, CacheError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse(path, &text)
}

/// Writes through a temporary file and a rename.
pub fn write(path: &Path, series: &RationalSeries) -> Result<(), CacheError> {
    let _guard = WRITE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(render(series).as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Parity recorded for the states the generators produce.
pub fn expected_parity(well: Well, state: u32) -> Parity {
    match well {
        Well::Central if state.is_multiple_of(2) => Parity::Even,
        Well::Central => Parity::Odd,
        Well::Side => Parity::NotApplicable,
    }
}

pub fn generate(well: Well, state: u32, order: usize) -> Result<RationalSeries, CacheError> {
    let series = match well {
        Well::Central => central_series(state, state % 2, order)?.0,
        Well::Side => side_series(state, order)?.0,
    };
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Extended,
    Created,
}

/// Reads the series from `path` when it covers `order`; otherwise generates
/// it and rewrites the file.  A file for a different state, or one that
/// fails validation, is an error and is left untouched.
pub fn load_or_generate(
    path: &Path,
    well: Well,
    state: u32,
    order: usize,
) -> Result<(RationalSeries, CacheOutcome), CacheError> {
    let parity = expected_parity(well, state);
    let existing = if path.exists() { Some(read(path)?) } else { None };
    if let Some(series) = &existing {
        if series.well != well || series.state_index != state || series.parity != parity {
            return Err(CacheError::StateMismatch {
                path: path.to_path_buf(),
                found: describe(series.well, series.state_index, series.parity),
                requested: describe(well, state, parity),
            });
        }
        if series.order() >= order {
            return Ok((series.truncated(order), CacheOutcome::Hit));
        }
    }
    log::info!("generating {} to order {order}", describe(well, state, parity));
    let series = generate(well, state, order)?;
    write(path, &series)?;
    let outcome = if existing.is_some() { CacheOutcome::Extended } else { CacheOutcome::Created };
    Ok((series, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_then_parse_is_identity() {
        let s = generate(Well::Central, 0, 12).unwrap();
        let text = render(&s);
        let back = parse(Path::new("mem"), &text).unwrap();
        assert_eq!(back, s);
        assert_eq!(render(&back), text);
    }

    #[test]
    fn edited_record_is_rejected() {
        let s = generate(Well::Side, 0, 6).unwrap();
        let text = render(&s);
        let last = text.lines().last().unwrap().to_string();
        let mut parts: Vec<String> = last.split(' ').map(str::to_string).collect();
        parts[1] = format!("{}1", parts[1]);
        let edited = text.replace(&last, &parts.join(" "));
        assert!(matches!(parse(Path::new("mem"), &edited), Err(CacheError::ChecksumMismatch { .. })));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let s = generate(Well::Central, 0, 2).unwrap();
        let text = render(&s).replace("version 1", "version 9");
        assert!(matches!(parse(Path::new("mem"), &text), Err(CacheError::UnsupportedVersion { .. })));
    }
}
