use std::fmt;

/// Errors produced by configuration validation, coefficient fitting, and
/// benchmarking. Evaluation itself never fails: invalid float inputs flow
/// through the branch-free pipeline as NaN.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The shipped coefficient sets are tuned for exactly two doubling steps.
    UnsupportedDoublings { requested: u32 },
    /// A coefficient set failed validation; the message names the offending
    /// field.
    InvalidCoefficients(String),
    /// A sweep specification is unusable (empty range, non-finite bounds, or
    /// too few samples).
    InvalidSweep(String),
    /// A benchmark specification is unusable (too few repetitions, empty
    /// batch, or no paths selected).
    InvalidBenchSpec(String),
    /// One benchmark repetition completes too quickly for the monotonic
    /// timer to resolve; rerun with a larger batch.
    TimerTooCoarse { resolution_ns: u64, sample_ns: u64 },
    /// A fit specification is unusable (grid too small or not odd-sized,
    /// degree too low, or variant/fitter mismatch).
    InvalidFitSpec(String),
    /// The least-squares system is singular (degenerate fit grid).
    SingularSystem(String),
    /// Gauss-Newton stopped improving without meeting the convergence
    /// threshold inside the iteration budget.
    NonConvergence { iterations: usize, last_residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDoublings { requested } => write!(
                f,
                "unsupported doubling count {requested}: shipped coefficient sets require exactly 2"
            ),
            Error::InvalidCoefficients(msg) => write!(f, "invalid coefficient set: {msg}"),
            Error::InvalidSweep(msg) => write!(f, "invalid sweep specification: {msg}"),
            Error::InvalidBenchSpec(msg) => write!(f, "invalid benchmark specification: {msg}"),
            Error::TimerTooCoarse {
                resolution_ns,
                sample_ns,
            } => write!(
                f,
                "timer resolution ({resolution_ns} ns) too coarse for a {sample_ns} ns repetition; \
                 increase the batch size"
            ),
            Error::InvalidFitSpec(msg) => write!(f, "invalid fit specification: {msg}"),
            Error::SingularSystem(msg) => write!(f, "singular least-squares system: {msg}"),
            Error::NonConvergence {
                iterations,
                last_residual,
            } => write!(
                f,
                "fit failed to converge after {iterations} iterations (last residual {last_residual:e})"
            ),
        }
    }
}

impl std::error::Error for Error {}
