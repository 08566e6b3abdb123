// SPDX-License-Identifier: Apache-2.0

//! GP-Tree: an in-memory spatial index that approximates objects by
//! adaptive Z-order grid cells and stores the cell codes in a prefix tree.

pub mod baseline;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod query;
pub mod tree;

pub use error::{Error, Result};
pub use baseline::{oracle_query, str_build, Answer, QueryMode, StrTree};
pub use geometry::{parse_wkt, Coord, Envelope, Geometry, ObjectId, Predicate, SpatialObject};
pub use grid::{CellCode, DecompositionConfig, GridCell, GridExtent};
pub use query::{
    eps_distance_query, knn_query, range_query, Ghsi, Neighbor, QueryOptions, QueryStats,
};
pub use tree::{GpTree, LookupTable, TreeState, TreeStats};
