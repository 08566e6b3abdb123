// SPDX-License-Identifier: Apache-2.0

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{rank, Answer, QueryMode};
use crate::error::{Error, Result};
use crate::geometry::{distance, exact_predicate, Envelope, Geometry, SpatialObject};
use crate::query::{Neighbor, QueryStats};

pub const DEFAULT_NODE_CAPACITY: usize = 10;

/// A node entry's `child` indexes `StrTree::nodes` in inner nodes and
/// `StrTree::objects` in leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct StrNode {
    pub envelope: Envelope,
    pub leaf: bool,
    pub entries: Vec<(Envelope, u32)>,
}

/// Sort-tile-recursive packed R-tree.
#[derive(Debug, Clone)]
pub struct StrTree {
    nodes: Vec<StrNode>,
    root: Option<u32>,
    objects: Vec<SpatialObject>,
    capacity: usize,
    height: u32,
}

fn tile(items: &mut [(Envelope, u32)], capacity: usize) -> Vec<Vec<(Envelope, u32)>> {
    let n = items.len();
    let leaves = n.div_ceil(capacity);
    let slices = (leaves as f64).sqrt().ceil() as usize;
    let per_slice = slices * capacity;
    let cx = |e: &Envelope| e.center().x;
    let cy = |e: &Envelope| e.center().y;
    items.sort_by(|a, b| cx(&a.0).total_cmp(&cx(&b.0)));
    let mut groups = Vec::with_capacity(leaves);
    for slice in items.chunks_mut(per_slice) {
        slice.sort_by(|a, b| cy(&a.0).total_cmp(&cy(&b.0)));
        groups.extend(slice.chunks(capacity).map(<[_]>::to_vec));
    }
    groups
}

fn union(entries: &[(Envelope, u32)]) -> Envelope {
    entries[1..].iter().fold(entries[0].0, |acc, (e, _)| acc.merge(e))
}

/// Bulk-loads `objects` bottom-up, `capacity` entries per node.
pub fn str_build(objects: &[SpatialObject], capacity: usize) -> Result<StrTree> {
    if capacity < 2 {
        return Err(Error::InvalidConfig(format!("node capacity {capacity} below 2")));
    }
    let mut tree = StrTree {
        nodes: Vec::new(),
        root: None,
        objects: objects.to_vec(),
        capacity,
        height: 0,
    };
    if objects.is_empty() {
        return Ok(tree);
    }
    let mut level: Vec<(Envelope, u32)> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.geometry.envelope(), i as u32))
        .collect();
    let mut leaf = true;
    loop {
        let groups = tile(&mut level, capacity);
        level = groups
            .into_iter()
            .map(|entries| {
                let envelope = union(&entries);
                tree.nodes.push(StrNode {
                    envelope,
                    leaf,
                    entries,
                });
                (envelope, (tree.nodes.len() - 1) as u32)
            })
            .collect();
        tree.height += 1;
        leaf = false;
        if level.len() == 1 {
            tree.root = Some(level[0].1);
            return Ok(tree);
        }
    }
}

#[derive(PartialEq)]
struct Key(f64, u8, u64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then(self.1.cmp(&other.1))
            .then(self.2.cmp(&other.2))
    }
}

impl StrTree {
    pub fn root(&self) -> Option<&StrNode> {
        self.root.map(|r| &self.nodes[r as usize])
    }

    pub fn node(&self, idx: u32) -> &StrNode {
        &self.nodes[idx as usize]
    }

    pub fn nodes(&self) -> &[StrNode] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.leaf).count()
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn object(&self, idx: u32) -> &SpatialObject {
        &self.objects[idx as usize]
    }

    /// 40 bytes per entry (envelope and reference) plus 16 per node, and the
    /// stored coordinates at 16 bytes each.
    pub fn memory_bytes(&self) -> u64 {
        let entries: usize = self.nodes.iter().map(|n| n.entries.len()).sum();
        let coords: usize = self.objects.iter().map(|o| o.geometry.num_coords()).sum();
        40 * entries as u64 + 16 * self.nodes.len() as u64 + 16 * coords as u64
    }

    /// Leaf entries whose envelope meets `window`.
    fn scan(&self, window: &Envelope, stats: &mut QueryStats, mut f: impl FnMut(&SpatialObject)) {
        let Some(root) = self.root else { return };
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            stats.nodes_visited += 1;
            for &(e, child) in &node.entries {
                if !e.intersects(window) {
                    continue;
                }
                if node.leaf {
                    stats.candidates += 1;
                    f(&self.objects[child as usize]);
                } else {
                    stack.push(child);
                }
            }
        }
    }

    pub fn query(&self, q: &Geometry, mode: QueryMode) -> Result<Answer> {
        self.query_with(q, mode, &mut QueryStats::default())
    }

    /// Filters by envelope, then checks each candidate on the full geometry.
    pub fn query_with(&self, q: &Geometry, mode: QueryMode, stats: &mut QueryStats) -> Result<Answer> {
        mode.validate()?;
        q.validate()?;
        let t0 = Instant::now();
        let before = stats.candidates;
        let answer = match mode {
            QueryMode::Range(theta) => {
                let mut ids = Vec::new();
                self.scan(&q.envelope(), stats, |o| {
                    if exact_predicate(q, &o.geometry, theta) {
                        ids.push(o.id);
                    }
                });
                Answer::Ids(ids)
            }
            QueryMode::EpsDistance(eps) => {
                let mut ids = Vec::new();
                self.scan(&q.envelope().expand_by(eps), stats, |o| {
                    if distance(q, &o.geometry) <= eps {
                        ids.push(o.id);
                    }
                });
                Answer::Ids(ids)
            }
            QueryMode::Knn(k) => Answer::Ranked(self.knn(q, k, stats)),
        };
        let answer = match answer {
            Answer::Ids(mut ids) => {
                ids.sort_unstable();
                stats.refined_accepted += ids.len() as u64;
                stats.refined_rejected += stats.candidates - before - ids.len() as u64;
                Answer::Ids(ids)
            }
            ranked => ranked,
        };
        stats.queries += 1;
        stats.refine_time += t0.elapsed();
        Ok(answer)
    }

    /// Best-first search. Nodes and unchecked objects are keyed by envelope
    /// distance, checked objects by exact distance; at equal keys unchecked
    /// entries come first so ties resolve by id.
    fn knn(&self, q: &Geometry, k: usize, stats: &mut QueryStats) -> Vec<Neighbor> {
        const NODE: u8 = 0;
        const OBJECT: u8 = 1;
        const CHECKED: u8 = 2;
        let Some(root) = self.root else {
            return Vec::new();
        };
        let qe = q.envelope();
        let before = stats.candidates;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Key(0.0, NODE, root as u64)));
        let mut out = Vec::with_capacity(k);
        while let Some(Reverse(Key(d, kind, idx))) = heap.pop() {
            match kind {
                NODE => {
                    let node = &self.nodes[idx as usize];
                    stats.nodes_visited += 1;
                    let kind = if node.leaf { OBJECT } else { NODE };
                    for &(e, child) in &node.entries {
                        heap.push(Reverse(Key(e.distance_to_envelope(&qe), kind, child as u64)));
                    }
                }
                OBJECT => {
                    stats.candidates += 1;
                    let o = &self.objects[idx as usize];
                    heap.push(Reverse(Key(distance(q, &o.geometry), CHECKED, o.id)));
                }
                _ => {
                    out.push(Neighbor { id: idx, distance: d });
                    if out.len() == k {
                        break;
                    }
                }
            }
        }
        stats.refined_accepted += out.len() as u64;
        stats.refined_rejected += stats.candidates - before - out.len() as u64;
        rank(out, k)
    }
}
