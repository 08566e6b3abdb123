// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::geometry::{Envelope, ObjectId, WktError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error(transparent)]
    Wkt(#[from] WktError),
    #[error("invalid envelope {0:?}")]
    InvalidEnvelope(Envelope),
    #[error("geometry envelope {geometry:?} is outside the grid extent {extent:?}")]
    OutsideExtent { geometry: Envelope, extent: Envelope },
    #[error("cell index ({col}, {row}) out of range for level {level}")]
    CellOutOfRange { col: u32, row: u32, level: u8 },
    #[error("invalid cell code: {0}")]
    InvalidCell(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("duplicate object id {0}")]
    DuplicateId(ObjectId),
    #[error("object id {0} referenced by the index is missing from the lookup table")]
    MissingObject(ObjectId),
    #[error("distance threshold must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
