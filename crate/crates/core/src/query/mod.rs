// SPDX-License-Identifier: Apache-2.0

//! Range, distance and nearest-neighbour queries over a [`GpTree`].
//!
//! Every query runs in two phases. Filtering turns the query into grid cells
//! and collects, per object, the cells where the query and the object
//! overlap in the tree. Each match is tagged a true hit when the cell types
//! alone prove the predicate; the rest are refined geometrically.
//!
//! [`GpTree`]: crate::tree::GpTree

mod distance;
mod filter;
mod ghsi;
mod knn;
mod range;

pub use distance::{eps_distance_query, eps_distance_query_with, eps_query_cells};
pub use filter::filter;
pub use ghsi::{dense_table_bytes, Ghsi, DEFAULT_GHSI_LEVEL};
pub use knn::{extend_query_cells, knn_query, knn_query_with, unviewed_cells, Neighbor};
pub use range::{clipped_parts, range_query, range_query_with, refine_candidate, QueryPlan};

use std::ops::AddAssign;
use std::time::Duration;

use serde::Serialize;

use crate::geometry::{ObjectId, Predicate};
use crate::grid::CellCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HitTag {
    TrueHit,
    Uncertain,
}

/// When a filter match may skip refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrueHitRule {
    /// Only when the containing cell of the overlapping pair is covered by
    /// its owner and the other side provably touches it.
    #[default]
    Sound,
    /// Whenever either cell of the pair is an interior cell. Unsound when
    /// the interior cell is the smaller one; kept for harness checks.
    AnyInterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    pub true_hit_rule: TrueHitRule,
    /// Extra levels below the envelope fit level that query geometries are
    /// always split to, on top of the tree's own setting.
    pub query_fit_levels: u8,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            true_hit_rule: TrueHitRule::Sound,
            query_fit_levels: DEFAULT_QUERY_FIT_LEVELS,
        }
    }
}

pub const DEFAULT_QUERY_FIT_LEVELS: u8 = 3;

/// One overlapping cell pair: `cell` is the smaller of the two cells and
/// `query_cell` indexes the query cell it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Overlap {
    pub cell: CellCode,
    pub query_cell: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateMatch {
    pub s_id: ObjectId,
    pub hit_tag: HitTag,
    pub overlaps: Vec<Overlap>,
}

/// Kind of query the filter works for; decides which cell pairs certify a
/// match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    Range(Predicate),
    /// Query cells come from an ε-dilation, so only interior query cells
    /// are known to lie within ε of the query.
    Distance,
    /// Candidate collection only; nothing is tagged a true hit.
    Collect,
}

/// Counters gathered while answering queries. Timings are wall-clock.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QueryStats {
    pub queries: u64,
    pub query_cells: u64,
    pub nodes_visited: u64,
    /// Longest descent seen, in nodes.
    pub max_descent: u64,
    /// Query cells whose descent visited more than `level + 1` nodes.
    pub descent_violations: u64,
    pub candidates: u64,
    pub true_hits: u64,
    pub refined_accepted: u64,
    pub refined_rejected: u64,
    pub clipped_segments: u64,
    pub knn_extension_rounds: u64,
    pub knn_step3_cells: u64,
    pub knn_early_exits: u64,
    #[serde(serialize_with = "as_micros")]
    pub filter_time: Duration,
    #[serde(serialize_with = "as_micros")]
    pub refine_time: Duration,
}

fn as_micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_micros())
}

impl AddAssign<&QueryStats> for QueryStats {
    fn add_assign(&mut self, o: &QueryStats) {
        self.queries += o.queries;
        self.query_cells += o.query_cells;
        self.nodes_visited += o.nodes_visited;
        self.max_descent = self.max_descent.max(o.max_descent);
        self.descent_violations += o.descent_violations;
        self.candidates += o.candidates;
        self.true_hits += o.true_hits;
        self.refined_accepted += o.refined_accepted;
        self.refined_rejected += o.refined_rejected;
        self.clipped_segments += o.clipped_segments;
        self.knn_extension_rounds += o.knn_extension_rounds;
        self.knn_step3_cells += o.knn_step3_cells;
        self.knn_early_exits += o.knn_early_exits;
        self.filter_time += o.filter_time;
        self.refine_time += o.refine_time;
    }
}
