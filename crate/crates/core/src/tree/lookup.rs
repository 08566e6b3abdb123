// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::geometry::{Envelope, Geometry, ObjectId, Segment};
use crate::grid::{CellCode, Decomposition, GridCell};

#[derive(Debug, Clone, PartialEq)]
pub struct LookupEntry {
    pub geometry: Geometry,
    pub envelope: Envelope,
    pub cells: Vec<GridCell>,
    /// Per boundary cell, indices into `segments` of the segments touching it.
    pub(crate) cell_segments: Vec<Vec<u32>>,
    pub(crate) segments: Vec<Segment>,
}

impl LookupEntry {
    pub(crate) fn new(geometry: Geometry, d: Decomposition) -> Self {
        Self {
            envelope: geometry.envelope(),
            segments: geometry.segments(),
            geometry,
            cells: d.cells,
            cell_segments: d.cell_segments,
        }
    }

    /// Index of the object's own cell that contains `code`.
    pub(crate) fn owning_cell(&self, code: &CellCode) -> Option<usize> {
        self.cells.iter().position(|c| c.cell.is_ancestor_of(code))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }
}

/// Object ID to geometry and decomposition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LookupTable {
    entries: HashMap<ObjectId, LookupEntry>,
}

impl LookupTable {
    pub(crate) fn insert(&mut self, id: ObjectId, geometry: Geometry, d: Decomposition) {
        self.entries.insert(id, LookupEntry::new(geometry, d));
    }

    pub(crate) fn insert_entry(&mut self, id: ObjectId, entry: LookupEntry) {
        self.entries.insert(id, entry);
    }

    pub fn get(&self, id: ObjectId) -> Option<&LookupEntry> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, &LookupEntry)> + '_ {
        self.entries.iter().map(|(&id, e)| (id, e))
    }

    pub fn cell_count(&self) -> usize {
        self.entries.values().map(|e| e.cells.len()).sum()
    }

    /// 8 bytes per key, 16 per coordinate and 9 per cell.
    pub fn memory_bytes(&self) -> u64 {
        self.entries
            .values()
            .map(|e| 8 + 16 * e.geometry.num_coords() as u64 + 9 * e.cells.len() as u64)
            .sum()
    }
}
