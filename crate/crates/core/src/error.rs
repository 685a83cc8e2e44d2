use thiserror::Error;

/// Errors shared by the estimation, sampling and clustering modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sample-size hypothesis fails; `needed` is the smallest admissible n.
    #[error("sample too small: need n >= {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    /// An exhaustive enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded: {required} terms over cap {cap}")]
    BudgetExceeded { required: u128, cap: u128 },

    /// A block statistic came out NaN or infinite; the offending tuple of
    /// block indices is reported instead of letting the median absorb it.
    #[error("non-finite block statistic at block tuple {tuple:?}")]
    PoisonedValue { tuple: Vec<usize> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
