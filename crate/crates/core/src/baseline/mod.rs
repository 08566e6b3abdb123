// SPDX-License-Identifier: Apache-2.0

//! Reference engines: an exhaustive scan and a packed R-tree over MBRs.

mod str_tree;

pub use str_tree::{str_build, StrNode, StrTree, DEFAULT_NODE_CAPACITY};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, exact_predicate, Geometry, ObjectId, Predicate, SpatialObject};
use crate::query::Neighbor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    Range(Predicate),
    EpsDistance(f64),
    Knn(usize),
}

impl QueryMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            QueryMode::EpsDistance(e) if !(e > 0.0 && e.is_finite()) => {
                Err(Error::NonPositiveEpsilon(e))
            }
            QueryMode::Knn(0) => Err(Error::ZeroK),
            _ => Ok(()),
        }
    }
}

/// Query result: ascending ids for range and distance queries, ranked
/// neighbours for kNN.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Answer {
    Ids(Vec<ObjectId>),
    Ranked(Vec<Neighbor>),
}

impl Answer {
    pub fn ids(&self) -> Vec<ObjectId> {
        match self {
            Answer::Ids(ids) => ids.clone(),
            Answer::Ranked(r) => r.iter().map(|n| n.id).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Answer::Ids(ids) => ids.len(),
            Answer::Ranked(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn rank(mut all: Vec<Neighbor>, k: usize) -> Vec<Neighbor> {
    all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
    all.truncate(k);
    all
}

/// Answers a query by testing every object.
pub fn oracle_query(objects: &[SpatialObject], q: &Geometry, mode: QueryMode) -> Result<Answer> {
    mode.validate()?;
    q.validate()?;
    Ok(match mode {
        QueryMode::Range(theta) => {
            let mut ids: Vec<ObjectId> = objects
                .iter()
                .filter(|o| exact_predicate(q, &o.geometry, theta))
                .map(|o| o.id)
                .collect();
            ids.sort_unstable();
            Answer::Ids(ids)
        }
        QueryMode::EpsDistance(eps) => {
            let mut ids: Vec<ObjectId> = objects
                .iter()
                .filter(|o| distance(q, &o.geometry) <= eps)
                .map(|o| o.id)
                .collect();
            ids.sort_unstable();
            Answer::Ids(ids)
        }
        QueryMode::Knn(k) => {
            let all = objects
                .iter()
                .map(|o| Neighbor {
                    id: o.id,
                    distance: distance(q, &o.geometry),
                })
                .collect();
            Answer::Ranked(rank(all, k))
        }
    })
}
