//! Shared error type for system construction and engine evaluation.

use thiserror::Error;

/// Everything the engines can reject or fail on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// System definition violates a structural invariant.
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    /// Pulse definition violates a structural invariant.
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    /// Query time lies outside the pulse window.
    #[error("time {t} ns outside pulse window [0, {width} ns]")]
    TimeOutOfRange { t: f64, width: f64 },
    /// The drive peak does not reach the requested anticrossing.
    #[error("anticrossing {index} is not traversed at this amplitude")]
    NotTraversed { index: usize },
    /// The requested interference path does not exist for this cell.
    #[error("path {index} does not exist here (cell has {count} paths)")]
    NoSuchPath { index: usize, count: usize },
    /// A scalar argument is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Integrator step too coarse for the fastest energy scale.
    #[error("step {dt} ns exceeds the stability budget {limit} ns")]
    StepTooLarge { dt: f64, limit: f64 },
    /// State norm drifted beyond budget during propagation.
    #[error("norm drift {drift:.3e} at step {step} exceeds the 1e-8 budget")]
    NormDrift { step: usize, drift: f64 },
    /// Axis vector fails a structural requirement.
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    /// Empty input series.
    #[error("empty series")]
    EmptySeries,
    /// Ridge threshold outside (0, 1).
    #[error("ridge threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    /// Both couplings vanish; no dark state exists.
    #[error("dark state undefined: both couplings are zero")]
    DarkStateUndefined,
    /// Operation is specific to a fixed TLS count.
    #[error("operation requires exactly {expected} TLSs, system has {got}")]
    WrongTlsCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
