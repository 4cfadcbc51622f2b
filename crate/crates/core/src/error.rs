use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    #[error("point budget of {budget} exceeded in {module} while enumerating {layer}")]
    BudgetExceeded {
        module: &'static str,
        layer: String,
        budget: u64,
    },

    #[error("empty point set: {context}")]
    EmptyPointSet { context: &'static str },

    #[error("exact integer overflow in {context}: block index {i} needs wider arithmetic")]
    ExactOverflow { context: &'static str, i: u32 },

    #[error("block verification at i={i} is infeasible: {why}")]
    InfeasibleBlock { i: u32, why: String },

    #[error("window reaches beyond the stored layer schedule (needs spacing > {max_spacing})")]
    ScheduleExhausted { max_spacing: f64 },
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            why: why.into(),
        }
    }

    /// Exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
