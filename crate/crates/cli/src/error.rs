// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{invalid} of {total} lines in {path} are invalid")]
    TooManyInvalid {
        path: PathBuf,
        invalid: usize,
        total: usize,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Index(#[from] gptree::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("engine {engine} disagrees with the oracle on query {query_id}")]
    Divergence { engine: String, query_id: usize },
}

impl CliError {
    /// Process exit code: 1 usage, 2 data, 3 correctness divergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Divergence { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
