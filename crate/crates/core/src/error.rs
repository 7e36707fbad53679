use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("invalid width {0}: must be positive and finite")]
    InvalidWidth(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("memory budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridTooNarrow(_) => "GridTooNarrow",
            Error::InvalidWidth(_) => "InvalidWidth",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidParams(_) => "InvalidParams",
            Error::StepTooLarge(_) => "StepTooLarge",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::NonPhysicalState(_) => "NonPhysicalState",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::Format(_) => "Format",
        }
    }

    /// True for guards that trip during a computation on otherwise valid
    /// input, as opposed to rejected configuration.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::GridTooNarrow(_) | Error::StepTooLarge(_) | Error::BudgetExceeded(_)
        )
    }
}
