//! Simulated storage array on top of `lmbr-core`: code construction, shard
//! files, failure injection, repair and exhaustive certification.

pub mod commands;
pub mod config;
pub mod shard;

use thiserror::Error;

pub use config::{Construction, ResolvedCode, SimConfig};
pub use shard::ShardFile;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_REFUSED: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    /// Bad parameters, mismatched inputs or an exceeded pattern cap.
    #[error("refused: {0}")]
    Refused(String),
    /// The operation ran and did not succeed.
    #[error("failed: {0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Refused(_) => EXIT_REFUSED,
            Self::Failed(_) => EXIT_FAIL,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl From<lmbr_core::Error> for CliError {
    fn from(e: lmbr_core::Error) -> Self {
        use lmbr_core::Error as E;
        match e {
            E::InsufficientRank { .. } | E::InconsistentData { .. } | E::Unrepairable(_) | E::ZeroInverse => {
                Self::Failed(e.to_string())
            }
            _ => Self::Refused(e.to_string()),
        }
    }
}
