use alloc::string::String;

/// Errors raised by learners, environments, the comparator oracle and metrics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value {value} outside [0, 1] in {context}")]
    OutOfRange { context: &'static str, value: f64 },

    #[error("action index {index} out of range for {num_actions} actions")]
    ActionOutOfRange { index: usize, num_actions: usize },

    #[error("constraint is infeasible: max_i c_i = {max_mean} < c0 = {threshold}")]
    Infeasible { max_mean: f64, threshold: f64 },

    #[error("{kind} learner does not accept {feedback} feedback")]
    WrongFeedback { kind: &'static str, feedback: &'static str },

    #[error("grid oracle supports at most 4 actions, got {0}")]
    GridTooLarge(usize),

    #[error("exponent fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn check_unit(context: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { context, value })
    }
}
