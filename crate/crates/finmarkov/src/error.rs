//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model validation, filtering, enumeration, and I/O.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model field violates its invariant. `field` names the offending
    /// entry, e.g. `"A[1][0]"` or `"blocks[2]"`.
    #[error("invalid {field}: {detail}")]
    Validation { field: String, detail: String },

    /// The observation at time `t` has zero probability under the model.
    #[error("observation at t={t} has probability zero under the model")]
    ImpossibleObservation { t: usize },

    /// Some output symbol has zero predicted mass, so the requested operator
    /// does not exist ((G x)_j = 0 for output j).
    #[error("output {output} has zero predicted mass (G x vanishes there)")]
    SingularOutputMass { output: usize },

    /// Exhaustive enumeration would exceed the configured atom budget.
    #[error("enumeration needs {required} atoms but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// An operation was called with no data.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A file or text input could not be parsed. `context` locates the
    /// problem (field path or line number).
    #[error("parse error at {context}: {detail}")]
    Parse { context: String, detail: String },
}

impl Error {
    pub fn validation(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub fn parse(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
