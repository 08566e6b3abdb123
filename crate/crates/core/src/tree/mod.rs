// SPDX-License-Identifier: Apache-2.0

//! Prefix tree over cell codes. Each level consumes one two-bit child slot,
//! so the path to a node spells its cell code.

mod lookup;
mod optimize;
mod snapshot;
mod stats;

pub use lookup::{LookupEntry, LookupTable};
pub use stats::{TreeStats, ID_BYTES, NODE_BYTES};

use crate::error::{Error, Result};
use crate::geometry::{ObjectId, SpatialObject};
use crate::grid::{decompose_detailed, CellCode, DecompositionConfig, GridExtent};

pub(crate) const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexNode {
    pub code: CellCode,
    pub(crate) children: [u32; 4],
    /// Objects whose interior cell is this node's cell (or, after node
    /// optimization, an ancestor's).
    pub il: Vec<ObjectId>,
    pub bl: Vec<ObjectId>,
    /// Boundary references inherited from ancestors.
    pub ul: Vec<ObjectId>,
}

impl IndexNode {
    fn new(code: CellCode) -> Self {
        Self {
            code,
            children: [NO_CHILD; 4],
            il: Vec::new(),
            bl: Vec::new(),
            ul: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(|&c| c == NO_CHILD)
    }

    pub fn has_items(&self) -> bool {
        !(self.il.is_empty() && self.bl.is_empty() && self.ul.is_empty())
    }

    pub fn child_slots(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.children
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != NO_CHILD)
            .map(|(i, &c)| (i, c))
    }

    pub fn item_count(&self) -> usize {
        self.il.len() + self.bl.len() + self.ul.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeState {
    Basic,
    NodeOptimized,
    Pruned,
}

/// How a visited node relates to the query cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    /// The node's cell contains the query cell (found while descending).
    Descent,
    /// The node's cell lies strictly inside the query cell.
    FanOut,
}

#[derive(Debug, Clone)]
pub struct GpTree {
    pub(crate) nodes: Vec<IndexNode>,
    pub(crate) sub_roots: Vec<u32>,
    pub(crate) state: TreeState,
    pub(crate) config: DecompositionConfig,
    pub(crate) extent: GridExtent,
}

impl GpTree {
    fn empty(config: DecompositionConfig, extent: GridExtent) -> Self {
        Self {
            nodes: vec![IndexNode::new(CellCode::ROOT)],
            sub_roots: vec![0],
            state: TreeState::Basic,
            config,
            extent,
        }
    }

    /// Decomposes every object and inserts each of its cells by walking
    /// the code two bits at a time from the root.
    pub fn build(
        objects: &[SpatialObject],
        config: DecompositionConfig,
        extent: GridExtent,
    ) -> Result<(GpTree, LookupTable)> {
        config.validate()?;
        let mut tree = Self::empty(config, extent);
        let mut table = LookupTable::default();
        for obj in objects {
            obj.geometry.validate()?;
            if table.contains(obj.id) {
                return Err(Error::DuplicateId(obj.id));
            }
            let d = decompose_detailed(&obj.geometry, &config, &extent)?;
            for cell in &d.cells {
                let node = tree.insert_path(cell.cell);
                let list = if cell.interior {
                    &mut tree.nodes[node].il
                } else {
                    &mut tree.nodes[node].bl
                };
                list.push(obj.id);
            }
            table.insert(obj.id, obj.geometry.clone(), d);
        }
        Ok((tree, table))
    }

    /// Build, node optimization and pruning in one call.
    pub fn build_optimized(
        objects: &[SpatialObject],
        config: DecompositionConfig,
        extent: GridExtent,
    ) -> Result<(GpTree, LookupTable)> {
        let (mut tree, table) = Self::build(objects, config, extent)?;
        tree.optimize_nodes();
        tree.prune();
        Ok((tree, table))
    }

    fn insert_path(&mut self, code: CellCode) -> usize {
        let mut node = 0usize;
        for depth in 0..code.level() {
            let slot = code.slot_at(depth);
            let next = self.nodes[node].children[slot];
            node = if next == NO_CHILD {
                let child = self.nodes[node].code.child(slot).expect("level <= 30");
                self.nodes.push(IndexNode::new(child));
                let idx = (self.nodes.len() - 1) as u32;
                self.nodes[node].children[slot] = idx;
                idx as usize
            } else {
                next as usize
            };
        }
        node
    }

    pub fn state(&self) -> TreeState {
        self.state
    }

    pub fn config(&self) -> &DecompositionConfig {
        &self.config
    }

    pub fn extent(&self) -> &GridExtent {
        &self.extent
    }

    pub fn root(&self) -> &IndexNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: u32) -> &IndexNode {
        &self.nodes[idx as usize]
    }

    pub fn child(&self, node: &IndexNode, slot: usize) -> Option<&IndexNode> {
        match node.children[slot] {
            NO_CHILD => None,
            c => Some(&self.nodes[c as usize]),
        }
    }

    /// Entry nodes for searches: the root until the tree is pruned.
    pub fn sub_roots(&self) -> impl Iterator<Item = &IndexNode> + '_ {
        self.sub_roots.iter().map(|&i| &self.nodes[i as usize])
    }

    /// Nodes reachable from the entry points, parents before children.
    pub fn reachable(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack: Vec<u32> = self.sub_roots.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            let node = &self.nodes[n as usize];
            for slot in (0..4).rev() {
                if node.children[slot] != NO_CHILD {
                    stack.push(node.children[slot]);
                }
            }
        }
        out
    }

    /// Node reached by following `code` from the entry points, if the full
    /// path exists.
    pub fn find(&self, code: CellCode) -> Option<&IndexNode> {
        let start = self
            .sub_roots()
            .find(|s| s.code.is_ancestor_of(&code))?;
        let mut node = start;
        for depth in start.code.level()..code.level() {
            node = self.child(node, code.slot_at(depth))?;
        }
        Some(node)
    }

    /// Visits every node whose cell overlaps `q`: first the nodes on the
    /// path down to `q`, then the whole subtree under it. Returns the number
    /// of nodes visited before the fan-out.
    pub fn visit_overlapping(&self, q: CellCode, mut f: impl FnMut(&IndexNode, Reach)) -> usize {
        let mut descent = 0;
        let mut fan_out: Vec<u32> = Vec::new();
        for &sr in &self.sub_roots {
            let start = &self.nodes[sr as usize];
            if start.code.is_ancestor_of(&q) {
                let mut node = start;
                descent += 1;
                f(node, Reach::Descent);
                let mut found = true;
                for depth in start.code.level()..q.level() {
                    let next = node.children[q.slot_at(depth)];
                    if next == NO_CHILD {
                        found = false;
                        break;
                    }
                    node = &self.nodes[next as usize];
                    descent += 1;
                    f(node, Reach::Descent);
                }
                if found {
                    fan_out.extend(node.child_slots().map(|(_, c)| c));
                }
                // Sub-roots are prefix-free: no other one can overlap q.
                break;
            } else if q.is_ancestor_of(&start.code) {
                fan_out.push(sr);
            }
        }
        while let Some(n) = fan_out.pop() {
            let node = &self.nodes[n as usize];
            f(node, Reach::FanOut);
            fan_out.extend(node.child_slots().map(|(_, c)| c));
        }
        descent
    }
}
