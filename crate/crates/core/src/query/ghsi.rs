// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpatialObject};
use crate::grid::{CellCode, GridExtent, MAX_LEVEL};
use crate::tree::LookupTable;

pub const DEFAULT_GHSI_LEVEL: u8 = 11;

/// Grid histogram: object counts per fixed-level cell. Each object is
/// counted once, in the cell holding its envelope center.
#[derive(Debug, Clone, PartialEq)]
pub struct Ghsi {
    level: u8,
    extent: GridExtent,
    counts: HashMap<CellCode, u32>,
    total: u64,
    reads: u64,
}

impl Ghsi {
    fn empty(level: u8, extent: GridExtent) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidConfig(format!("GHSI level {level} outside 1..=30")));
        }
        Ok(Self {
            level,
            extent,
            counts: HashMap::new(),
            total: 0,
            reads: 0,
        })
    }

    fn add(&mut self, g: &Geometry) {
        let cell = self.extent.locate(&g.envelope().center(), self.level);
        *self.counts.entry(cell).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn build(objects: &[SpatialObject], level: u8, extent: GridExtent) -> Result<Self> {
        let mut h = Self::empty(level, extent)?;
        for o in objects {
            h.add(&o.geometry);
        }
        Ok(h)
    }

    pub fn from_table(table: &LookupTable, level: u8, extent: GridExtent) -> Result<Self> {
        let mut h = Self::empty(level, extent)?;
        for (_, e) in table.iter() {
            h.reads += 1;
            h.add(&e.geometry);
        }
        Ok(h)
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn extent(&self) -> &GridExtent {
        &self.extent
    }

    pub fn count(&self, cell: &CellCode) -> u32 {
        self.counts.get(cell).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Lookup-table entries read while building from a table.
    pub fn table_reads(&self) -> u64 {
        self.reads
    }

    /// Number of non-empty cells.
    pub fn occupied(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellCode, u32)> + '_ {
        self.counts.iter().map(|(&c, &n)| (c, n))
    }

    /// Size of a dense table at this level: 12 bytes per cell.
    pub fn table_bytes(&self) -> u64 {
        dense_table_bytes(self.level)
    }
}

/// Bytes of a dense histogram with one 12-byte slot per cell of `level`.
pub fn dense_table_bytes(level: u8) -> u64 {
    (1u64 << (2 * level as u32)) * 12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_wkt, Envelope};

    fn unit() -> GridExtent {
        GridExtent::new(Envelope::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn ten_points_in_one_cell() {
        let objs: Vec<SpatialObject> = (0..10)
            .map(|i| SpatialObject::new(i, Geometry::point(0.1 + 0.001 * i as f64, 0.1)))
            .collect();
        let h = Ghsi::build(&objs, 4, unit()).unwrap();
        let cell = CellCode::encode(1, 1, 4).unwrap();
        assert_eq!(h.count(&cell), 10);
        assert_eq!(h.total(), 10);
        assert_eq!(h.occupied(), 1);
    }

    #[test]
    fn large_polygon_counts_once_at_its_center() {
        let g = parse_wkt("POLYGON ((0.05 0.05, 0.95 0.05, 0.95 0.7, 0.05 0.7, 0.05 0.05))").unwrap();
        let h = Ghsi::build(&[SpatialObject::new(3, g)], 3, unit()).unwrap();
        assert_eq!(h.total(), 1);
        let sum: u32 = h.iter().map(|(_, n)| n).sum();
        assert_eq!(sum, 1);
        // Envelope center (0.5, 0.375) lies in column 4, row 3 at level 3.
        assert_eq!(h.count(&CellCode::encode(4, 3, 3).unwrap()), 1);
    }

    #[test]
    fn dense_size_at_level_eleven() {
        assert_eq!(dense_table_bytes(11), 50_331_648);
        let h = Ghsi::build(&[], DEFAULT_GHSI_LEVEL, GridExtent::default()).unwrap();
        assert_eq!(h.table_bytes(), 50_331_648);
    }

    #[test]
    fn level_bounds() {
        assert!(Ghsi::build(&[], 0, unit()).is_err());
        assert!(Ghsi::build(&[], 31, unit()).is_err());
        assert!(Ghsi::build(&[], 30, unit()).is_ok());
    }
}
