// SPDX-License-Identifier: Apache-2.0

use rustc_hash::FxHashMap;

use super::{CandidateMatch, FilterMode, HitTag, Overlap, QueryStats, TrueHitRule};
use crate::geometry::Predicate;
use crate::grid::GridCell;
use crate::tree::{GpTree, Reach};

#[derive(Clone, Copy, PartialEq, Eq)]
enum List {
    Interior,
    Boundary,
    Uncertain,
}

/// Whether a reference found in `list` at a node certifies the match.
/// `same_cell` is set when the node cell equals the query cell.
fn certifies(
    mode: FilterMode,
    rule: TrueHitRule,
    list: List,
    reach: Reach,
    same_cell: bool,
    query_interior: bool,
) -> bool {
    match mode {
        FilterMode::Collect | FilterMode::Range(Predicate::Contains) => return false,
        _ => {}
    }
    if rule == TrueHitRule::AnyInterior {
        return query_interior || list == List::Interior;
    }
    // Every range query cell meets the query; distance query cells only do
    // when interior.
    let query_touches = query_interior || matches!(mode, FilterMode::Range(_));
    match (reach, list) {
        (Reach::Descent, List::Interior) => query_touches,
        (Reach::Descent, List::Boundary) => same_cell && query_interior,
        (Reach::FanOut, List::Interior | List::Boundary) => query_interior,
        (_, List::Uncertain) => false,
    }
}

/// Looks up every query cell in the tree and merges the references found
/// into one match per object, a true hit if any of its pairs certifies it.
pub fn filter(
    tree: &GpTree,
    cells: &[GridCell],
    mode: FilterMode,
    rule: TrueHitRule,
    stats: &mut QueryStats,
) -> Vec<CandidateMatch> {
    let mut index: FxHashMap<u64, usize> = FxHashMap::default();
    let mut out: Vec<CandidateMatch> = Vec::new();
    for (qi, qc) in cells.iter().enumerate() {
        let q = qc.cell;
        let mut visited = 0u64;
        let descent = tree.visit_overlapping(q, |node, reach| {
            visited += 1;
            let overlap = Overlap {
                cell: if reach == Reach::Descent { q } else { node.code },
                query_cell: qi as u32,
            };
            let same = node.code == q;
            for (list, ids) in [
                (List::Interior, &node.il),
                (List::Boundary, &node.bl),
                (List::Uncertain, &node.ul),
            ] {
                if ids.is_empty() {
                    continue;
                }
                let certain = certifies(mode, rule, list, reach, same, qc.interior);
                for &id in ids {
                    let slot = *index.entry(id).or_insert_with(|| {
                        out.push(CandidateMatch {
                            s_id: id,
                            hit_tag: HitTag::Uncertain,
                            overlaps: Vec::new(),
                        });
                        out.len() - 1
                    });
                    let m = &mut out[slot];
                    if certain {
                        m.hit_tag = HitTag::TrueHit;
                    }
                    m.overlaps.push(overlap);
                }
            }
        });
        stats.query_cells += 1;
        stats.nodes_visited += visited;
        stats.max_descent = stats.max_descent.max(descent as u64);
        if descent > q.level() as usize + 1 {
            stats.descent_violations += 1;
        }
    }
    for m in out.iter_mut() {
        m.overlaps.sort_unstable();
        m.overlaps.dedup();
    }
    stats.candidates += out.len() as u64;
    out
}
