//! Command-line driver for the triple-well toolkit: table regeneration with
//! reference checks, coefficient caches and thin wrappers over the library.

pub mod cache;
pub mod commands;
pub mod golden;
pub mod report;
pub mod tables;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Cache(#[from] cache::CacheError),
    #[error(transparent)]
    Series(#[from] twlab_core::bender_wu::BenderWuError),
    #[error(transparent)]
    Spectral(#[from] twlab_core::spectral::SpectralError),
    #[error(transparent)]
    Nonpert(#[from] twlab_core::nonpert::NonpertError),
    #[error(transparent)]
    Asymptotic(#[from] twlab_core::asymptotics::AsymptoticError),
    #[error(transparent)]
    Wkb(#[from] twlab_core::wkb::WkbError),
    #[error(transparent)]
    Numerics(#[from] twlab_core::numerics::NumericsError),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A reference cell failed its check.
    pub const GOLDEN_FAILURE: i32 = 1;
    /// Invalid arguments (also used by the argument parser).
    pub const USAGE: i32 = 2;
    /// No failures, but cells were skipped under the configured budget.
    pub const SKIPPED: i32 = 3;
    /// A computation or i/o step failed.
    pub const ERROR: i32 = 4;
}
