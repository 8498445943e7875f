use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical engine, the scheme math and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. negative SNR).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violates the invariants of a domain type.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The composite Simpson refinement did not reach the requested tolerance.
    #[error(
        "quadrature did not converge after {refinements} refinements \
         (best estimate {best_estimate}, last delta {last_delta:e})"
    )]
    Convergence {
        best_estimate: f64,
        last_delta: f64,
        refinements: u32,
    },

    /// Crossover search could not find a sign change of the rate gap.
    #[error("no sign change of the rate gap in (0, {snr_hi}]: {reason}")]
    Bracket { snr_hi: f64, reason: String },

    #[error("malformed config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
