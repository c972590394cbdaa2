//! Error taxonomy shared by every layer of the library.
//!
//! Configuration problems and numerical failures are kept apart so that the
//! binary can map them onto distinct process exit codes.

use thiserror::Error;

/// Everything that can go wrong between parsing a scenario and writing files.
#[derive(Debug, Error)]
pub enum Error {
    /// Model or policy parameters violate a documented invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A truncated series failed to meet its declared tolerance.
    #[error("series truncation did not converge: {0}")]
    TruncationUnconverged(String),

    /// The Floquet-harmonic path was requested far outside its intended
    /// regime; the time-domain path has no such limit.
    #[error("drive ratio alpha = {alpha:.3e} exceeds the harmonic-path guideline {limit}")]
    AlphaTooLarge { alpha: f64, limit: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Two independently computed observables disagree beyond tolerance.
    #[error("cross-path mismatch: {0}")]
    PathMismatch(String),

    /// Least-squares input was degenerate (e.g. identically zero current).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Scenario file could not be read, parsed, or validated.
    #[error("config error: {0}")]
    Config(String),

    /// Output files could not be written.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code contract: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            _ => 3,
        }
    }
}
