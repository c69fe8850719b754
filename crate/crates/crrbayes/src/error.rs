//! Crate-wide error type.
//!
//! Errors split into two broad classes that callers (notably the CLI) treat
//! differently: *validation* errors, where an input violated a documented
//! precondition, and *numerical* errors, where a computation failed despite
//! valid-looking inputs (vanishing truncation mass, degenerate trees, ...).
//! [`Error::is_numerical`] encodes the distinction.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar input violated a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name as it appears in the API.
        name: &'static str,
        /// Human-readable description of the violation.
        reason: String,
    },

    /// The truncated-normal mass on the support interval underflowed: the
    /// distribution places no representable probability there.
    #[error(
        "truncated-normal mass vanished on ({lower}, {upper}) \
         for location {location}, scale {scale}"
    )]
    MassVanished {
        location: f64,
        scale: f64,
        lower: f64,
        upper: f64,
    },

    /// The no-arbitrage ordering `0 < d < 1 + r_f < u` does not hold.
    #[error("no-arbitrage ordering violated: need 0 < d < 1+r_f < u, got u={u}, d={d}, r_f={r_f}")]
    ArbitrageViolation { u: f64, d: f64, r_f: f64 },

    /// Up and down factors are numerically indistinguishable.
    #[error("degenerate tree: u - d = {gap:e} is below tolerance")]
    DegenerateTree { gap: f64 },

    /// A calibration window lacks observations on one side of `1 + r_f`.
    #[error(
        "degenerate window: {ups} up-move(s) and {downs} down-move(s); \
         calibration needs at least one of each"
    )]
    DegenerateWindow { ups: usize, downs: usize },

    /// A row of an input file failed to parse or validate.
    #[error("{path}:{line}: {reason}")]
    Series {
        /// File the row came from.
        path: PathBuf,
        /// 1-based line number (header is line 1).
        line: u64,
        /// What went wrong.
        reason: String,
    },

    /// A required input collection was empty.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// Underlying I/O failure.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Underlying CSV parse/serialize failure.
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// JSON serialization failure when emitting reports.
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error reflects a numerical failure rather than an input
    /// validation failure. The CLI maps numerical failures to exit code 2 and
    /// everything else to exit code 1.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::MassVanished { .. } | Error::DegenerateTree { .. })
    }

    /// Shorthand constructor for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
