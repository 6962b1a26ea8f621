use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be odd and at least 3, got {0}")]
    InvalidDistance(usize),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fault mechanism {0} does not exist in this circuit")]
    UnknownFault(usize),

    #[error(
        "mechanism {mechanism} triggers {count} {family} detectors; \
         the CNOT schedule does not produce graphlike errors"
    )]
    NonGraphlike {
        mechanism: usize,
        family: &'static str,
        count: usize,
    },

    #[error("defect at node {0} has no path to a partner or to the boundary")]
    Disconnected(usize),

    #[error("fault-distance search at weight {weight} needs {needed} combinations, budget is {budget}")]
    SearchBudget {
        weight: usize,
        needed: u128,
        budget: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
