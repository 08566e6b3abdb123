// SPDX-License-Identifier: Apache-2.0

//! Z-order cell codes over a regular quadtree subdivision of a fixed extent.
//!
//! A cell at level `l` is addressed by its column and row in a
//! `2^l x 2^l` grid. Its code interleaves the bits of both indices,
//! most-significant first, with the column bit ahead of the row bit, so
//! each quadtree level contributes two bits and a parent's code is a
//! prefix of all its descendants' codes. Within a level the child slot is
//! `col_bit << 1 | row_bit`: 0 = lower-left, 1 = upper-left,
//! 2 = lower-right, 3 = upper-right.

mod cellops;
mod decompose;

pub use cellops::{convert_cells, extend_cells, merge_cells};
pub use decompose::{decompose, DecompositionConfig};
pub(crate) use decompose::{decompose_detailed, decompose_prepared, Decomposition};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coord, Envelope};

pub const MAX_LEVEL: u8 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCode {
    level: u8,
    bits: u64,
}

fn spread(v: u32) -> u64 {
    let mut x = v as u64 & 0x3fff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact(mut x: u64) -> u32 {
    x &= 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff;
    x as u32
}

impl CellCode {
    pub const ROOT: CellCode = CellCode { level: 0, bits: 0 };

    /// Builds a code from raw bits; `bits` must fit in `2 * level` bits.
    pub fn from_bits(level: u8, bits: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidCell(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if level < 32 && bits >> (2 * level as u32) != 0 {
            return Err(Error::InvalidCell(format!(
                "bits {bits:#b} longer than 2 * {level}"
            )));
        }
        Ok(Self { level, bits })
    }

    pub fn encode(col: u32, row: u32, level: u8) -> Result<Self> {
        if level > MAX_LEVEL || (col as u64) >> level != 0 || (row as u64) >> level != 0 {
            return Err(Error::CellOutOfRange { col, row, level });
        }
        Ok(Self {
            level,
            bits: (spread(col) << 1) | spread(row),
        })
    }

    pub fn decode(&self) -> (u32, u32, u8) {
        (compact(self.bits >> 1), compact(self.bits), self.level)
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Two-bit child slot taken when descending from depth `depth` to
    /// `depth + 1` on the way to this cell.
    #[inline]
    pub fn slot_at(&self, depth: u8) -> usize {
        debug_assert!(depth < self.level);
        ((self.bits >> (2 * (self.level - depth - 1) as u32)) & 3) as usize
    }

    /// Ancestor-or-self test by prefix comparison.
    #[inline]
    pub fn is_ancestor_of(&self, other: &CellCode) -> bool {
        self.level <= other.level
            && other.bits >> (2 * (other.level - self.level) as u32) == self.bits
    }

    /// True when one cell contains the other.
    #[inline]
    pub fn overlaps(&self, other: &CellCode) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }

    pub fn ancestor_at(&self, level: u8) -> CellCode {
        debug_assert!(level <= self.level);
        CellCode {
            level,
            bits: self.bits >> (2 * (self.level - level) as u32),
        }
    }

    pub fn child(&self, slot: usize) -> Result<CellCode> {
        if self.level >= MAX_LEVEL {
            return Err(Error::InvalidCell(format!(
                "cell at level {} has no children",
                self.level
            )));
        }
        Ok(CellCode {
            level: self.level + 1,
            bits: (self.bits << 2) | (slot as u64 & 3),
        })
    }

    pub fn children(&self) -> Result<[CellCode; 4]> {
        Ok([self.child(0)?, self.child(1)?, self.child(2)?, self.child(3)?])
    }

    pub fn parent(&self) -> Result<CellCode> {
        if self.level == 0 {
            return Err(Error::InvalidCell("the root cell has no parent".into()));
        }
        Ok(CellCode {
            level: self.level - 1,
            bits: self.bits >> 2,
        })
    }

    /// Same-level edge and corner neighbours inside the grid.
    pub fn neighbors(&self) -> Vec<CellCode> {
        let (col, row, level) = self.decode();
        let n = 1i64 << level;
        let mut out = Vec::with_capacity(8);
        for dc in -1i64..=1 {
            for dr in -1i64..=1 {
                if dc == 0 && dr == 0 {
                    continue;
                }
                let (c, r) = (col as i64 + dc, row as i64 + dr);
                if (0..n).contains(&c) && (0..n).contains(&r) {
                    out.push(CellCode::encode(c as u32, r as u32, level).expect("in range"));
                }
            }
        }
        out
    }
}

impl fmt::Display for CellCode {
    /// Binary form, two digits per level; the root prints as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return f.write_str("-");
        }
        write!(f, "{:0width$b}", self.bits, width = 2 * self.level as usize)
    }
}

impl FromStr for CellCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" || s.is_empty() {
            return Ok(CellCode::ROOT);
        }
        if !s.len().is_multiple_of(2) || s.len() > 2 * MAX_LEVEL as usize {
            return Err(Error::InvalidCell(format!("bad code length {}", s.len())));
        }
        let bits = u64::from_str_radix(s, 2).map_err(|e| Error::InvalidCell(e.to_string()))?;
        CellCode::from_bits((s.len() / 2) as u8, bits)
    }
}

/// A cell of an object's approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub cell: CellCode,
    pub interior: bool,
}

impl GridCell {
    pub fn interior(cell: CellCode) -> Self {
        Self {
            cell,
            interior: true,
        }
    }

    pub fn boundary(cell: CellCode) -> Self {
        Self {
            cell,
            interior: false,
        }
    }
}

/// The rectangle covered by the level-0 cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridExtent {
    bounds: Envelope,
}

impl Default for GridExtent {
    fn default() -> Self {
        Self {
            bounds: Envelope {
                min_x: -180.0,
                min_y: -90.0,
                max_x: 180.0,
                max_y: 90.0,
            },
        }
    }
}

impl GridExtent {
    pub fn new(bounds: Envelope) -> Result<Self> {
        if bounds.is_degenerate() || !bounds.diagonal().is_finite() {
            return Err(Error::InvalidEnvelope(bounds));
        }
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &Envelope {
        &self.bounds
    }

    pub fn cell_width(&self, level: u8) -> f64 {
        self.bounds.width() / (1u64 << level) as f64
    }

    pub fn cell_height(&self, level: u8) -> f64 {
        self.bounds.height() / (1u64 << level) as f64
    }

    fn axis(min: f64, max: f64, width: f64, idx: u32, n: u64) -> (f64, f64) {
        let lo = min + idx as f64 * width;
        let hi = if idx as u64 + 1 == n {
            max
        } else {
            min + (idx as f64 + 1.0) * width
        };
        (lo, hi)
    }

    pub fn cell_bounds(&self, c: CellCode) -> Envelope {
        let (col, row, level) = c.decode();
        let n = 1u64 << level;
        let b = &self.bounds;
        let (min_x, max_x) = Self::axis(b.min_x, b.max_x, self.cell_width(level), col, n);
        let (min_y, max_y) = Self::axis(b.min_y, b.max_y, self.cell_height(level), row, n);
        Envelope {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    /// Column/row of the level cell holding `p`; coordinates on a shared
    /// edge go to the higher index, coordinates on the far border clamp.
    pub fn locate_index(&self, p: &Coord, level: u8) -> (u32, u32) {
        let n = 1u64 << level;
        let idx = |v: f64, min: f64, w: f64| -> u32 {
            let i = ((v - min) / w).floor();
            i.clamp(0.0, (n - 1) as f64) as u32
        };
        (
            idx(p.x, self.bounds.min_x, self.cell_width(level)),
            idx(p.y, self.bounds.min_y, self.cell_height(level)),
        )
    }

    pub fn locate(&self, p: &Coord, level: u8) -> CellCode {
        let (col, row) = self.locate_index(p, level);
        CellCode::encode(col, row, level).expect("clamped index")
    }

    /// Deepest level (capped at `max_level`) whose cells are at least as
    /// wide and tall as `env`.
    pub fn fit_level(&self, env: &Envelope, max_level: u8) -> u8 {
        let mut level = 0;
        while level < max_level
            && self.cell_width(level + 1) >= env.width()
            && self.cell_height(level + 1) >= env.height()
        {
            level += 1;
        }
        level
    }

    /// Inclusive column/row ranges of the level cells meeting `env`.
    pub fn index_range(&self, env: &Envelope, level: u8) -> ((u32, u32), (u32, u32)) {
        let lo = self.locate_index(&Coord::new(env.min_x, env.min_y), level);
        let hi = self.locate_index(&Coord::new(env.max_x, env.max_y), level);
        ((lo.0, hi.0), (lo.1, hi.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(s: &str) -> CellCode {
        s.parse().unwrap()
    }

    fn unit() -> GridExtent {
        GridExtent::new(Envelope::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(CellCode::encode(0, 0, 3).unwrap().to_string(), "000000");
        assert_eq!(CellCode::encode(1, 1, 1).unwrap().to_string(), "11");
        assert_eq!(code("000000").decode(), (0, 0, 3));
        assert_eq!(code("11").decode(), (1, 1, 1));
        assert!(CellCode::encode(2, 0, 1).is_err());
        assert!(CellCode::encode(0, 0, 31).is_err());
    }

    #[test]
    fn level_two_codes_trace_the_z_curve() {
        // Hand-walked Z traversal of a 4x4 grid, column bit first: within
        // each quadrant visit (0,0), (0,1), (1,0), (1,1), quadrants in the
        // same order.
        let walk: [(u32, u32); 16] = [
            (0, 0), (0, 1), (1, 0), (1, 1),
            (0, 2), (0, 3), (1, 2), (1, 3),
            (2, 0), (2, 1), (3, 0), (3, 1),
            (2, 2), (2, 3), (3, 2), (3, 3),
        ];
        let mut all: Vec<(u64, (u32, u32))> = (0..4)
            .flat_map(|c| (0..4).map(move |r| (c, r)))
            .map(|(c, r)| (CellCode::encode(c, r, 2).unwrap().bits(), (c, r)))
            .collect();
        all.sort();
        let bits: Vec<u64> = all.iter().map(|a| a.0).collect();
        assert_eq!(bits, (0..16).collect::<Vec<u64>>());
        let order: Vec<(u32, u32)> = all.into_iter().map(|a| a.1).collect();
        assert_eq!(order, walk);
    }

    #[test]
    fn root_bounds_and_level_one_partition() {
        let ext = unit();
        let root = ext.cell_bounds(CellCode::ROOT);
        assert_eq!((root.min_x, root.min_y, root.max_x, root.max_y), (0.0, 0.0, 1.0, 1.0));
        let kids = CellCode::ROOT.children().unwrap().map(|c| ext.cell_bounds(c));
        let area: f64 = kids.iter().map(Envelope::area).sum();
        assert_eq!(area, 1.0);
        for i in 0..4 {
            for j in i + 1..4 {
                let a = kids[i];
                let b = kids[j];
                let ox = (a.max_x.min(b.max_x) - a.min_x.max(b.min_x)).max(0.0);
                let oy = (a.max_y.min(b.max_y) - a.min_y.max(b.min_y)).max(0.0);
                assert_eq!(ox * oy, 0.0);
            }
        }
    }

    #[test]
    fn ancestry_examples() {
        let a = code("10");
        let b = code("10100011");
        assert!(a.is_ancestor_of(&b));
        assert!(!code("01").is_ancestor_of(&b));
        assert!(unit().cell_bounds(a).contains_envelope(&unit().cell_bounds(b)));
        assert!(CellCode::ROOT.is_ancestor_of(&b));
        assert!(b.is_ancestor_of(&b));
        assert!(!b.is_ancestor_of(&a));
    }

    #[test]
    fn children_and_parent() {
        let c = code("10");
        let kids: Vec<String> = c.children().unwrap().iter().map(|k| k.to_string()).collect();
        assert_eq!(kids, ["1000", "1001", "1010", "1011"]);
        let ext = unit();
        for k in c.children().unwrap() {
            assert_eq!(k.parent().unwrap(), c);
            assert!(ext.cell_bounds(c).contains_envelope(&ext.cell_bounds(k)));
        }
        assert!(CellCode::ROOT.parent().is_err());
        let deep = CellCode::encode(0, 0, MAX_LEVEL).unwrap();
        assert!(deep.children().is_err());
    }

    #[test]
    fn neighbor_counts() {
        assert_eq!(CellCode::encode(0, 0, 2).unwrap().neighbors().len(), 3);
        assert_eq!(CellCode::encode(1, 2, 2).unwrap().neighbors().len(), 8);
        assert_eq!(CellCode::encode(0, 2, 2).unwrap().neighbors().len(), 5);
        assert!(CellCode::ROOT.neighbors().is_empty());
    }

    #[test]
    fn exhaustive_ancestry_matches_bounds_up_to_level_four() {
        let ext = unit();
        let mut cells = Vec::new();
        for level in 0..=4u8 {
            for c in 0..(1u32 << level) {
                for r in 0..(1u32 << level) {
                    cells.push(CellCode::encode(c, r, level).unwrap());
                }
            }
        }
        for a in &cells {
            let ba = ext.cell_bounds(*a);
            for b in &cells {
                let bb = ext.cell_bounds(*b);
                let geometric = ba.min_x <= bb.min_x
                    && ba.min_y <= bb.min_y
                    && bb.max_x <= ba.max_x
                    && bb.max_y <= ba.max_y;
                assert_eq!(a.is_ancestor_of(b), geometric, "{a} {b}");
            }
        }
    }

    #[test]
    fn fit_level_examples() {
        let ext = unit();
        let env = Envelope::new(0.1, 0.1, 0.2, 0.15).unwrap();
        // Level 3 cells are 0.125 wide, level 4 are 0.0625.
        assert_eq!(ext.fit_level(&env, 16), 3);
        assert_eq!(ext.fit_level(&env, 2), 2);
        let pt = Envelope::new(0.5, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(ext.fit_level(&pt, 16), 16);
    }

    #[test]
    fn text_form_round_trips() {
        assert_eq!(code("-"), CellCode::ROOT);
        assert_eq!(CellCode::ROOT.to_string(), "-");
        assert!("101".parse::<CellCode>().is_err());
        assert!("1x".parse::<CellCode>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn encode_decode_round_trip(level in 0u8..=30, c in any::<u32>(), r in any::<u32>()) {
            let mask = if level == 0 { 0 } else { (1u64 << level) - 1 } as u32;
            let (c, r) = (c & mask, r & mask);
            let code = CellCode::encode(c, r, level).unwrap();
            prop_assert_eq!(code.decode(), (c, r, level));
            prop_assert_eq!(code.to_string().parse::<CellCode>().unwrap(), code);
        }

        #[test]
        fn ancestry_agrees_with_geometry(la in 0u8..=12, lb in 0u8..=12, seed in any::<u64>()) {
            let ext = GridExtent::default();
            let pick = |level: u8, s: u64| {
                let n = 1u64 << level;
                CellCode::encode((s % n) as u32, ((s / n.max(1)) % n) as u32, level).unwrap()
            };
            let b = pick(lb, seed);
            // Half the time derive `a` from b's ancestry so both verdicts occur.
            let a = if seed % 2 == 0 && la <= lb { b.ancestor_at(la) } else { pick(la, seed.rotate_left(17)) };
            let (ba, bb) = (ext.cell_bounds(a), ext.cell_bounds(b));
            let geometric = ba.min_x <= bb.min_x && ba.min_y <= bb.min_y
                && bb.max_x <= ba.max_x && bb.max_y <= ba.max_y;
            prop_assert_eq!(a.is_ancestor_of(&b), geometric);
        }

        #[test]
        fn neighbors_agree_with_decoded_adjacency(level in 1u8..=10, seed in any::<u64>()) {
            let n = 1u64 << level;
            let c = CellCode::encode((seed % n) as u32, ((seed >> 32) % n) as u32, level).unwrap();
            let (col, row, _) = c.decode();
            let ns = c.neighbors();
            for m in &ns {
                let (mc, mr, ml) = m.decode();
                prop_assert_eq!(ml, level);
                let (dc, dr) = ((mc as i64 - col as i64).abs(), (mr as i64 - row as i64).abs());
                prop_assert!(dc <= 1 && dr <= 1 && (dc, dr) != (0, 0));
            }
            let expected = (-1i64..=1).flat_map(|a| (-1i64..=1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (0, 0))
                .filter(|&(a, b)| {
                    let (x, y) = (col as i64 + a, row as i64 + b);
                    x >= 0 && y >= 0 && x < n as i64 && y < n as i64
                })
                .count();
            prop_assert_eq!(ns.len(), expected);
        }
    }
}
