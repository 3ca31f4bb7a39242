use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rug::Rational;
use twlab::commands::{self, parse_decimal, parse_omega};
use twlab::report::{Format, Report};
use twlab::tables::{self, Settings, TableId};
use twlab::{cache, exit, CliError};
use twlab_core::asymptotics::calibrated_branch;
use twlab_core::bender_wu::{Parity, Well};
use twlab_core::nonpert::Formula;
use twlab_core::parallel;
use twlab_core::{Branch, Precision};

#[derive(Parser, Debug)]
#[command(name = "twlab", version, about = "Triple-well spectral toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "md", global = true)]
    format: Format,
    /// Working precision in decimal digits (at least 16).
    #[arg(long, default_value_t = Precision::DEFAULT_DIGITS, global = true)]
    precision: u32,
    /// Sign s in (-1)^x = e^{s i pi x}; defaults to the calibrated branch.
    #[arg(long, global = true, allow_hyphen_values = true)]
    branch: Option<Branch>,
    /// Worker threads (0 uses every core).
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
    /// Directory for coefficient caches.
    #[arg(long, env = "TWLAB_CACHE_DIR", global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regenerate a reference table and check every cell.
    Table {
        #[arg(long, value_enum)]
        id: TableId,
        /// Comma-separated omega values (tables I, III, IV).
        #[arg(long, value_delimiter = ',', default_value = "30,50,70,90,110")]
        omega: Vec<String>,
        /// Highest perturbative order a cell may need; larger cells are skipped.
        #[arg(long, default_value_t = 300)]
        max_order: usize,
        /// Largest oscillator basis for reference eigenvalues.
        #[arg(long, default_value_t = 1200)]
        max_basis: usize,
    },
    /// Generate (or read back) exact perturbative coefficients.
    Series {
        #[arg(long)]
        well: Well,
        #[arg(long, default_value_t = 0)]
        state: u32,
        #[arg(long)]
        order: usize,
        /// Cache file; defaults to <cache dir>/<well>-<state>.twc.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Certified eigenvalues of the unscaled Hamiltonian.
    Spectrum {
        #[arg(long)]
        omega: String,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        target_digits: u32,
        /// Initial basis size (doubled until converged).
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long, default_value_t = 1200)]
        max_basis: usize,
    },
    /// Roots of the WKB quantization condition.
    Wkb {
        #[arg(long)]
        omega: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        epsilon: String,
        #[arg(long)]
        parity: Parity,
    },
    /// Closed-form nonperturbative levels and splittings.
    Nonpert {
        #[arg(long)]
        omega: String,
        #[arg(long, default_value = "both")]
        formula: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        epsilon: String,
    },
}

fn settings(cli: &Cli, max_order: usize, max_basis: usize) -> Result<Settings, CliError> {
    let precision = Precision::new(cli.precision)?;
    Ok(Settings {
        precision,
        branch: cli.branch.unwrap_or_else(|| calibrated_branch(precision)),
        cache_dir: cli.cache_dir.clone().unwrap_or_else(cache::default_dir),
        max_order,
        max_basis,
    })
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn formulas(text: &str) -> Result<Vec<Formula>, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![Formula::ValleyMethod, Formula::DiluteGas]),
        other => Ok(vec![other.parse().map_err(usage)?]),
    }
}

/// Report plus the exit code it implies.
fn run(cli: &Cli) -> Result<(Report, i32), CliError> {
    match &cli.command {
        Command::Table { id, omega, max_order, max_basis } => {
            let s = settings(cli, *max_order, *max_basis)?;
            let omegas = omega.iter().map(|w| parse_omega(w)).collect::<Result<Vec<Rational>, _>>().map_err(usage)?;
            let report = tables::build(*id, &omegas, &s)?;
            let summary = report.summary.clone().unwrap_or_default();
            let code = if summary.failed > 0 {
                exit::GOLDEN_FAILURE
            } else if summary.skipped > 0 {
                exit::SKIPPED
            } else {
                exit::OK
            };
            Ok((report, code))
        }
        Command::Series { well, state, order, cache: path } => {
            let s = settings(cli, *order, 0)?;
            let path = path.clone().unwrap_or_else(|| s.cache_dir.join(cache::file_name(*well, *state)));
            Ok((commands::series(*well, *state, *order, &path)?, exit::OK))
        }
        Command::Spectrum { omega, count, target_digits, basis, max_basis } => {
            let s = settings(cli, 0, *max_basis)?;
            let w = parse_omega(omega).map_err(usage)?;
            Ok((commands::spectrum(&w, *count, *target_digits, *basis, &s)?, exit::OK))
        }
        Command::Wkb { omega, epsilon, parity } => {
            let s = settings(cli, 0, 0)?;
            let w = parse_omega(omega).map_err(usage)?;
            let eps = parse_decimal(epsilon).map_err(usage)?;
            Ok((commands::wkb(&w, &eps, *parity, &s)?, exit::OK))
        }
        Command::Nonpert { omega, formula, epsilon } => {
            let s = settings(cli, 0, 0)?;
            let w = parse_omega(omega).map_err(usage)?;
            let eps = parse_decimal(epsilon).map_err(usage)?;
            Ok((commands::nonpert(&w, &formulas(formula)?, &eps, &s)?, exit::OK))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match parallel::with_threads(cli.jobs, || run(&cli)) {
        Ok((report, code)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.render(cli.format).as_bytes()).is_err() {
                return ExitCode::from(exit::ERROR as u8);
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, CliError::Usage(_)) { exit::USAGE } else { exit::ERROR };
            ExitCode::from(code as u8)
        }
    }
}
