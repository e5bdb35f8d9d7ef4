//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (out-of-range sector, parity mismatch, angle outside [0, π],
    /// negative time or rate, nonpositive fit input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The dense oracle was asked for a system larger than it supports.
    #[error("capacity error: n = {n} exceeds the dense-oracle limit n ≤ {max}")]
    Capacity { n: u32, max: u32 },

    /// A two-outcome measurement with P ∈ {0, 1} carries no information.
    #[error("degenerate measurement: survival probability P = {p} admits no Fisher information")]
    DegenerateMeasurement { p: f64 },

    /// The configuration is insensitive to the estimated angle.
    #[error("sensitivity error: {0}")]
    Sensitivity(String),

    /// Zero quantum Fisher information: the Cramér–Rao bound diverges.
    #[error("no information: quantum Fisher information is zero")]
    NoInformation,

    /// The requested operation is defined only for a restricted configuration.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A numerical self-check failed; this signals a bug, not an input problem.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    /// Finite-difference step-size validation (Richardson check) failed.
    #[error("step-size error: {0}")]
    StepSize(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
