use thiserror::Error;

use crate::model::{AssignmentViolation, PointId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(AssignmentViolation),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Internal consistency failure, e.g. leftover edges that do not balance
    /// at some worker. Seeing this from the encoder means a bug.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("exact lower bound refused for K={k} (limit {limit}); use the greedy search")]
    ExactLimit { k: usize, limit: usize },

    #[error("worker w{} could not decode points {}", .worker + 1, format_ids(.missing))]
    DecodeFailure { worker: usize, missing: Vec<PointId> },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::InvalidAssignment(_) | Error::Parse { .. } | Error::ExactLimit { .. }
        )
    }
}

fn format_ids(ids: &[PointId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(",")
}
