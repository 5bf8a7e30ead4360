use thiserror::Error;

use crate::func::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {context}: {value} is outside {expected}")]
    Domain {
        context: &'static str,
        value: f64,
        expected: String,
    },

    #[error("invalid partition: {}", fmt_violations(.0))]
    InvalidPartition(Vec<Violation>),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("contraction violation on branch {branch}: sup|S| = {sup} >= 1")]
    ContractionViolation { branch: usize, sup: f64 },

    #[error("unsupported operator form: {0}")]
    UnsupportedForm(&'static str),

    #[error("continuity undecidable, endpoint conditions required")]
    ContinuityUndecidable,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(context: &'static str, value: f64, expected: impl Into<String>) -> Self {
        Error::Domain {
            context,
            value,
            expected: expected.into(),
        }
    }
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
