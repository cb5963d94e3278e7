use thiserror::Error;

use crate::lp::LpError;
use crate::partition::PartitionViolation;
use crate::table::SignalingWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("port width {requested} exceeds the configured maximum {cap}")]
    Resource { requested: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("table is signaling: {0}")]
    Signaling(SignalingWitness),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(PartitionViolation),

    #[error("infeasible element: p * cond exceeds base at {cell}")]
    Infeasible { cell: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 1 verification failure, 2 usage, 3 resource cap, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Parse(_) | Error::Unsupported(_) | Error::InvalidTable(_) => 2,
            Error::Resource { .. } => 3,
            Error::Io(_) | Error::Json(_) => 4,
            Error::Signaling(_)
            | Error::InvalidPartition(_)
            | Error::Infeasible { .. }
            | Error::Lp(_)
            | Error::Consistency(_) => 1,
        }
    }
}
