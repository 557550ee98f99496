//! Error types shared across the simulator.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Configuration rejected before any computation ran.
    #[error("config error: {0}")]
    Config(String),

    /// A quantity left its admissible domain (out-of-grid bounds, z <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The truncated grid cannot contain the requested operation
    /// (e.g. a swept interval reached x_max during boundary selection).
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// A runtime invariant of the scheme failed (assertion-grade; exit code 2).
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A backend cannot run with the given discretization; the message names
    /// the violated bound.
    #[error("backend configuration error: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
