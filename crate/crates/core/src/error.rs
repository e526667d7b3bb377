use alloc::string::String;

use chrono::NaiveDate;

/// Errors raised by parsing, transforms, model fitting and scoring.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("{column} decreases on {date} ({previous} -> {current})")]
    Monotonicity {
        column: &'static str,
        date: NaiveDate,
        previous: u64,
        current: u64,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("degenerate scale: series is constant at {0}")]
    DegenerateScale(f64),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("every grid candidate failed ({0} tried)")]
    ExhaustedGrid(usize),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
