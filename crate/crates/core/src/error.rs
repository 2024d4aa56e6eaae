use thiserror::Error;

/// Errors raised by the exact and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine exhausted its budget before reaching the tolerance.
    #[error("accuracy error: best estimate {best} with error estimate {error_estimate} after {evaluations} evaluations")]
    Accuracy {
        best: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// The requested quantity diverges because the coalescent does not come down from infinity.
    #[error("expected depth stays infinite for alpha = {alpha} (coalescent does not come down from infinity)")]
    StaysInfinite { alpha: f64 },

    /// The driving measure is invalid (bad mass, bad parameter, unreadable description).
    #[error("invalid measure: {0}")]
    Measure(String),

    /// A simulation parameter is out of range or a cap was hit where it is not allowed.
    #[error("simulation error: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
