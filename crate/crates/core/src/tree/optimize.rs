// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use super::{GpTree, IndexNode, TreeState, NO_CHILD};
use crate::geometry::ObjectId;

const MAX_SUB_ROOTS: usize = 4;

fn merge_into(dst: &mut Vec<ObjectId>, src: &[ObjectId]) {
    if src.is_empty() {
        return;
    }
    dst.extend_from_slice(src);
    dst.sort_unstable();
    dst.dedup();
}

impl GpTree {
    /// Pushes the lists of every internal node down to its children until
    /// only leaves hold references. Interior references stay interior;
    /// boundary and inherited references become uncertain. A node with
    /// references gets all four child slots filled so that no part of its
    /// cell loses them.
    pub fn optimize_nodes(&mut self) {
        if self.state != TreeState::Basic {
            return;
        }
        let mut queue = VecDeque::from([0u32]);
        while let Some(n) = queue.pop_front() {
            if self.nodes[n as usize].is_leaf() {
                continue;
            }
            if self.nodes[n as usize].has_items() {
                let code = self.nodes[n as usize].code;
                let parent = std::mem::replace(&mut self.nodes[n as usize], IndexNode::new(code));
                let mut children = parent.children;
                for (slot, child) in children.iter_mut().enumerate() {
                    if *child == NO_CHILD {
                        let code = parent.code.child(slot).expect("internal node below max level");
                        self.nodes.push(IndexNode::new(code));
                        *child = (self.nodes.len() - 1) as u32;
                    }
                    let c = &mut self.nodes[*child as usize];
                    merge_into(&mut c.il, &parent.il);
                    merge_into(&mut c.ul, &parent.bl);
                    merge_into(&mut c.ul, &parent.ul);
                }
                self.nodes[n as usize].children = children;
            }
            let node = &self.nodes[n as usize];
            queue.extend(node.child_slots().map(|(_, c)| c));
        }
        self.state = TreeState::NodeOptimized;
    }

    /// Replaces the root by up to four sub-roots: starting from the root's
    /// children, an empty internal sub-root is swapped for its children while
    /// the total stays within four. Each surviving sub-root then skips down
    /// any chain of empty single-child nodes.
    pub fn prune(&mut self) {
        if self.state == TreeState::Pruned {
            return;
        }
        if self.state == TreeState::Basic {
            self.optimize_nodes();
        }
        let root = &self.nodes[0];
        let mut queue: VecDeque<u32> = if root.is_leaf() {
            VecDeque::new()
        } else {
            root.child_slots().map(|(_, c)| c).collect()
        };
        let mut frozen = Vec::new();
        if root.is_leaf() && root.has_items() {
            frozen.push(0);
        }
        while let Some(s) = queue.pop_front() {
            let node = &self.nodes[s as usize];
            if node.is_leaf() || node.has_items() {
                frozen.push(s);
                continue;
            }
            let kids: Vec<u32> = node.child_slots().map(|(_, c)| c).collect();
            if queue.len() + frozen.len() + kids.len() > MAX_SUB_ROOTS {
                frozen.push(s);
            } else {
                queue.extend(kids);
            }
        }
        for s in frozen.iter_mut() {
            loop {
                let node = &self.nodes[*s as usize];
                if node.has_items() || node.child_slots().count() != 1 {
                    break;
                }
                *s = node.child_slots().next().expect("one child").1;
            }
        }
        frozen.sort_by_key(|&s| {
            let c = self.nodes[s as usize].code;
            (c.level(), c.bits())
        });
        self.sub_roots = frozen;
        self.state = TreeState::Pruned;
        self.compact();
    }

    /// Drops nodes no longer reachable from the entry points. The root stays
    /// at index 0 with its child links cleared once the tree is pruned.
    fn compact(&mut self) {
        let mut remap = vec![NO_CHILD; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut root = IndexNode::new(self.nodes[0].code);
        if self.sub_roots == [0] {
            root = self.nodes[0].clone();
        }
        nodes.push(root);
        remap[0] = 0;
        let order = self.reachable();
        for &n in &order {
            if n == 0 {
                continue;
            }
            remap[n as usize] = nodes.len() as u32;
            nodes.push(self.nodes[n as usize].clone());
        }
        for node in nodes.iter_mut() {
            for c in node.children.iter_mut() {
                if *c != NO_CHILD {
                    *c = remap[*c as usize];
                }
            }
        }
        if self.sub_roots != [0] {
            nodes[0].children = [NO_CHILD; 4];
        }
        self.sub_roots = self.sub_roots.iter().map(|&s| remap[s as usize]).collect();
        self.nodes = nodes;
    }
}
