// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{GpTree, TreeState};

/// Four child references at 8 bytes and three list headers at 16 bytes.
pub const NODE_BYTES: u64 = 4 * 8 + 3 * 16;
pub const ID_BYTES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TreeStats {
    pub height: u32,
    pub node_count: u64,
    pub leaf_count: u64,
    pub il_entries: u64,
    pub bl_entries: u64,
    pub ul_entries: u64,
    pub memory_bytes: u64,
    /// Code bits held by the tree: two per node below the root.
    pub code_bits: u64,
}

impl GpTree {
    /// Structural counters over the nodes reachable from the entry points.
    /// A pruned tree counts its root as one extra level above the sub-roots.
    pub fn stats(&self) -> TreeStats {
        let mut s = TreeStats::default();
        let pruned = self.state == TreeState::Pruned;
        for &sr in &self.sub_roots {
            let base = self.nodes[sr as usize].code.level();
            let mut stack = vec![sr];
            while let Some(n) = stack.pop() {
                let node = &self.nodes[n as usize];
                s.node_count += 1;
                if node.is_leaf() {
                    s.leaf_count += 1;
                }
                s.il_entries += node.il.len() as u64;
                s.bl_entries += node.bl.len() as u64;
                s.ul_entries += node.ul.len() as u64;
                let depth = if pruned {
                    1 + (node.code.level() - base) as u32
                } else {
                    node.code.level() as u32
                };
                s.height = s.height.max(depth);
                stack.extend(node.child_slots().map(|(_, c)| c));
            }
        }
        if pruned {
            s.node_count += 1;
        }
        s.code_bits = 2 * (s.node_count - 1);
        s.memory_bytes =
            s.node_count * NODE_BYTES + ID_BYTES * (s.il_entries + s.bl_entries + s.ul_entries);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Envelope, Geometry, SpatialObject};
    use crate::grid::{DecompositionConfig, GridExtent};

    #[test]
    fn root_only() {
        let (t, _) =
            GpTree::build(&[], DecompositionConfig::default(), GridExtent::default()).unwrap();
        let s = t.stats();
        assert_eq!((s.height, s.node_count, s.leaf_count), (0, 1, 1));
        assert_eq!(s.memory_bytes, 80);
    }

    #[test]
    fn memory_counts_nodes_and_ids() {
        let ext = GridExtent::new(Envelope::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let cfg = DecompositionConfig {
            max_level: 2,
            point_level: 2,
            ..Default::default()
        };
        let objs = [
            SpatialObject::new(0, Geometry::point(0.1, 0.1)),
            SpatialObject::new(1, Geometry::point(0.1, 0.2)),
        ];
        let (t, _) = GpTree::build(&objs, cfg, ext).unwrap();
        let s = t.stats();
        // root -> "00" -> "0000" holding both points.
        assert_eq!((s.node_count, s.bl_entries, s.height), (3, 2, 2));
        assert_eq!(s.memory_bytes, 3 * 80 + 2 * 8);
        assert_eq!(s.code_bits, 4);
    }
}
