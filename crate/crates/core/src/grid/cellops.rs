// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use super::{CellCode, GridCell, GridExtent};
use crate::error::{Error, Result};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(eps))
    }
}

fn covered_by(cell: &CellCode, sources: &HashSet<CellCode>, min_level: u8) -> bool {
    (min_level..=cell.level()).any(|l| sources.contains(&cell.ancestor_at(l)))
}

/// Same-level cells within Euclidean distance `eps` of each source cell,
/// excluding cells already covered by a source cell. All returned cells are
/// boundary cells.
pub fn extend_cells(cells: &[GridCell], eps: f64, extent: &GridExtent) -> Result<Vec<GridCell>> {
    check_eps(eps)?;
    let sources: HashSet<CellCode> = cells.iter().map(|c| c.cell).collect();
    let min_level = sources.iter().map(CellCode::level).min().unwrap_or(0);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for src in &sources {
        let (col, row, level) = src.decode();
        let n = 1i64 << level;
        let (w, h) = (extent.cell_width(level), extent.cell_height(level));
        let dc = (eps / w).ceil() as i64;
        let dr = (eps / h).ceil() as i64;
        for c in (col as i64 - dc).max(0)..=(col as i64 + dc).min(n - 1) {
            let gx = ((c - col as i64).abs() - 1).max(0) as f64 * w;
            if gx > eps {
                continue;
            }
            for r in (row as i64 - dr).max(0)..=(row as i64 + dr).min(n - 1) {
                let gy = ((r - row as i64).abs() - 1).max(0) as f64 * h;
                if gx.hypot(gy) > eps {
                    continue;
                }
                let cell = CellCode::encode(c as u32, r as u32, level)?;
                if seen.insert(cell) && !covered_by(&cell, &sources, min_level) {
                    out.push(GridCell::boundary(cell));
                }
            }
        }
    }
    out.sort_by_key(|c| (c.cell.level(), c.cell.bits()));
    Ok(out)
}

/// Boundary cells whose diagonal is strictly shorter than `eps` become
/// interior cells.
pub fn convert_cells(cells: &[GridCell], eps: f64, extent: &GridExtent) -> Result<Vec<GridCell>> {
    check_eps(eps)?;
    Ok(cells
        .iter()
        .map(|c| {
            if !c.interior && extent.cell_bounds(c.cell).diagonal() < eps {
                GridCell::interior(c.cell)
            } else {
                *c
            }
        })
        .collect())
}

/// Replaces complete same-tag sibling quartets by their parent until no
/// quartet remains. Duplicate codes collapse, interior winning.
pub fn merge_cells(cells: &[GridCell]) -> Vec<GridCell> {
    let mut tags: HashMap<CellCode, bool> = HashMap::with_capacity(cells.len());
    for c in cells {
        *tags.entry(c.cell).or_insert(false) |= c.interior;
    }
    let max_level = tags.keys().map(CellCode::level).max().unwrap_or(0);
    for level in (1..=max_level).rev() {
        let mut groups: HashMap<CellCode, [Option<bool>; 4]> = HashMap::new();
        for (cell, &interior) in tags.iter().filter(|(c, _)| c.level() == level) {
            let parent = cell.parent().expect("level >= 1");
            groups.entry(parent).or_default()[cell.slot_at(level - 1)] = Some(interior);
        }
        for (parent, slots) in groups {
            let Some(first) = slots[0] else { continue };
            if slots.iter().all(|s| *s == Some(first)) {
                for child in parent.children().expect("parent below max level") {
                    tags.remove(&child);
                }
                *tags.entry(parent).or_insert(false) |= first;
            }
        }
    }
    let mut out: Vec<GridCell> = tags
        .into_iter()
        .map(|(cell, interior)| GridCell { cell, interior })
        .collect();
    out.sort_by_key(|c| (c.cell.level(), c.cell.bits()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Coord, Envelope};
    use proptest::prelude::*;

    fn unit() -> GridExtent {
        GridExtent::new(Envelope::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap()
    }

    fn b(col: u32, row: u32, level: u8) -> GridCell {
        GridCell::boundary(CellCode::encode(col, row, level).unwrap())
    }

    fn i(col: u32, row: u32, level: u8) -> GridCell {
        GridCell::interior(CellCode::encode(col, row, level).unwrap())
    }

    #[test]
    fn small_eps_gives_the_neighbor_ring() {
        let ext = unit();
        let src = b(5, 6, 4);
        let out = extend_cells(&[src], 0.01, &ext).unwrap();
        let mut want: Vec<CellCode> = src.cell.neighbors();
        want.sort_by_key(|c| c.bits());
        let got: Vec<CellCode> = out.iter().map(|c| c.cell).collect();
        assert_eq!(got, want);
        assert!(out.iter().all(|c| !c.interior));
    }

    #[test]
    fn zero_eps_rejected() {
        assert!(extend_cells(&[b(0, 0, 1)], 0.0, &unit()).is_err());
        assert!(convert_cells(&[b(0, 0, 1)], -1.0, &unit()).is_err());
    }

    #[test]
    fn extension_skips_cells_covered_by_coarser_sources() {
        let ext = unit();
        // A fine cell next to a coarse source: its neighbours inside the
        // coarse cell are already covered.
        let coarse = i(0, 0, 1);
        let fine = b(8, 0, 4);
        let out = extend_cells(&[coarse, fine], 0.01, &ext).unwrap();
        assert!(out.iter().all(|c| !coarse.cell.is_ancestor_of(&c.cell)));
        assert!(out.iter().any(|c| c.cell == CellCode::encode(9, 1, 4).unwrap()));
    }

    #[test]
    fn convert_uses_the_real_diagonal() {
        let ext = GridExtent::default();
        // World extent, level 10: 0.3515625 x 0.17578125.
        let c10 = b(100, 100, 10);
        let diag10 = (360.0f64 / 1024.0).hypot(180.0 / 1024.0);
        assert!((ext.cell_bounds(c10.cell).diagonal() - diag10).abs() < 1e-12);
        assert!(!convert_cells(&[c10], 0.03, &ext).unwrap()[0].interior);
        // Level 14: diagonal about 0.02456.
        let c14 = b(100, 100, 14);
        assert!(convert_cells(&[c14], 0.03, &ext).unwrap()[0].interior);
        assert!(convert_cells(&[c14], diag10, &ext).unwrap()[0].interior);
    }

    #[test]
    fn convert_is_strict_and_keeps_interiors() {
        let ext = unit();
        let c = b(0, 0, 2);
        let d = ext.cell_bounds(c.cell).diagonal();
        assert!(!convert_cells(&[c], d, &ext).unwrap()[0].interior);
        assert!(convert_cells(&[c], d * 1.0001, &ext).unwrap()[0].interior);
        let inner = i(1, 1, 2);
        assert_eq!(convert_cells(&[inner], 1e-9, &ext).unwrap(), vec![inner]);
    }

    #[test]
    fn merge_quartets() {
        let four = [i(0, 0, 2), i(0, 1, 2), i(1, 0, 2), i(1, 1, 2)];
        assert_eq!(merge_cells(&four), vec![i(0, 0, 1)]);
        assert_eq!(merge_cells(&four[..3]).len(), 3);
        let mixed = [i(0, 0, 2), b(0, 1, 2), i(1, 0, 2), i(1, 1, 2)];
        assert_eq!(merge_cells(&mixed).len(), 4);
        // Cascades to the root.
        let all: Vec<GridCell> = (0..4).flat_map(|c| (0..4).map(move |r| b(c, r, 2))).collect();
        assert_eq!(merge_cells(&all), vec![GridCell::boundary(CellCode::ROOT)]);
        // Duplicate codes: interior wins.
        assert_eq!(merge_cells(&[b(3, 3, 2), i(3, 3, 2)]), vec![i(3, 3, 2)]);
    }

    fn level4_set() -> impl Strategy<Value = Vec<GridCell>> {
        prop::collection::vec((0u32..16, 0u32..16, any::<bool>()), 1..40)
            .prop_map(|v| v.into_iter().map(|(c, r, t)| GridCell { cell: CellCode::encode(c, r, 4).unwrap(), interior: t }).collect())
    }

    fn mixed_set() -> impl Strategy<Value = Vec<GridCell>> {
        prop::collection::vec((1u8..=4, any::<u32>(), any::<u32>(), any::<bool>()), 1..30).prop_map(
            |v| {
                v.into_iter()
                    .map(|(l, c, r, t)| {
                        let m = (1u32 << l) - 1;
                        GridCell { cell: CellCode::encode(c & m, r & m, l).unwrap(), interior: t }
                    })
                    .collect()
            },
        )
    }

    /// Which micro cells (level 5) lie under some cell, and whether any
    /// covering cell is interior.
    fn raster(cells: &[GridCell]) -> Vec<Option<bool>> {
        let mut out = vec![None; 1024];
        for col in 0..32u32 {
            for row in 0..32u32 {
                let m = CellCode::encode(col, row, 5).unwrap();
                for c in cells.iter().filter(|c| c.cell.is_ancestor_of(&m)) {
                    let slot = &mut out[(col * 32 + row) as usize];
                    *slot = Some(slot.unwrap_or(false) | c.interior);
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn extend_matches_exhaustive_scan(src in level4_set(), eps in 0.001f64..0.3) {
            let ext = unit();
            let got: HashSet<CellCode> = extend_cells(&src, eps, &ext).unwrap().into_iter().map(|c| c.cell).collect();
            let srcs: HashSet<CellCode> = src.iter().map(|c| c.cell).collect();
            let mut want = HashSet::new();
            for col in 0..16 {
                for row in 0..16 {
                    let c = CellCode::encode(col, row, 4).unwrap();
                    if srcs.contains(&c) {
                        continue;
                    }
                    let r = ext.cell_bounds(c);
                    let d = srcs.iter().map(|s| ext.cell_bounds(*s).distance_to_envelope(&r)).fold(f64::INFINITY, f64::min);
                    if d <= eps {
                        want.insert(c);
                    }
                }
            }
            prop_assert_eq!(got, want);
        }

        #[test]
        fn merge_preserves_coverage_and_tags(cells in mixed_set()) {
            // Inputs with nested cells have no single tag per point; compare
            // only on point sets where the input is unambiguous.
            let merged = merge_cells(&cells);
            let before = raster(&cells);
            let after = raster(&merged);
            for (x, y) in before.iter().zip(&after) {
                prop_assert_eq!(x.is_some(), y.is_some());
            }
            let flat: Vec<GridCell> = {
                let mut seen = HashMap::new();
                for c in &cells { *seen.entry(c.cell).or_insert(false) |= c.interior; }
                seen.into_iter().map(|(cell, interior)| GridCell { cell, interior }).collect()
            };
            let nested = flat.iter().any(|a| flat.iter().any(|b| a.cell != b.cell && a.cell.is_ancestor_of(&b.cell)));
            if !nested {
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn merge_is_idempotent(cells in mixed_set()) {
            let once = merge_cells(&cells);
            prop_assert_eq!(merge_cells(&once), once);
        }

        #[test]
        fn eps_cells_cover_the_dilation(src in level4_set(), eps in 0.001f64..0.2, pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 50)) {
            let ext = unit();
            let mut all = extend_cells(&src, eps, &ext).unwrap();
            all.extend(convert_cells(&src, eps, &ext).unwrap());
            let merged = merge_cells(&all);
            for (x, y) in pts {
                let p = Coord::new(x, y);
                let d = src.iter().map(|c| ext.cell_bounds(c.cell).distance_to_coord(&p)).fold(f64::INFINITY, f64::min);
                let inside = merged.iter().any(|c| ext.cell_bounds(c.cell).contains_coord(&p));
                if d <= eps {
                    prop_assert!(inside, "{:?} at distance {}", p, d);
                }
            }
        }
    }
}
