use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed initial graph or other structural input.
    #[error("invalid graph spec: {0}")]
    InvalidSpec(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter `{field}` = {value}: {reason}")]
    Parameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("schedule error at step {step}: {reason}")]
    Schedule { step: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("branching cap exceeded: {branches} branches > cap {cap}")]
    BranchCap { branches: u128, cap: u128 },

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_) | Error::Parameter { .. } | Error::Config(_) | Error::Domain(_)
        )
    }
}

/// Validates that `value` is a probability.
pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::Parameter {
            field,
            value,
            reason: "must be finite",
        });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Parameter {
            field,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(value)
}
