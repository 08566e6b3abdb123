// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::time::Instant;

use super::{filter, FilterMode, HitTag, QueryOptions, QueryStats};
use crate::error::{Error, Result};
use crate::geometry::{distance, Geometry, ObjectId};
use crate::grid::{convert_cells, decompose, extend_cells, merge_cells, GridCell, MAX_LEVEL};
use crate::tree::{GpTree, LookupTable};

/// Query cells for an ε-distance query: the decomposition of `q`, its
/// ε-neighbourhood, and small boundary cells promoted to interior.
///
/// Cells finer than the level whose cells are at least ε wide are lifted to
/// that level before extending, and the lifted cells join the query as
/// boundary cells.
pub fn eps_query_cells(tree: &GpTree, q: &Geometry, eps: f64) -> Result<Vec<GridCell>> {
    q.validate()?;
    let extent = tree.extent();
    let base = decompose(q, tree.config(), extent)?;
    let mut lift = 0u8;
    while lift < MAX_LEVEL
        && extent.cell_width(lift + 1) >= eps
        && extent.cell_height(lift + 1) >= eps
    {
        lift += 1;
    }
    let mut sources: Vec<GridCell> = Vec::with_capacity(base.len());
    let mut lifted = HashSet::new();
    for c in &base {
        if c.cell.level() > lift {
            if lifted.insert(c.cell.ancestor_at(lift)) {
                sources.push(GridCell::boundary(c.cell.ancestor_at(lift)));
            }
        } else {
            sources.push(*c);
        }
    }
    let mut cells = extend_cells(&sources, eps, extent)?;
    cells.extend(lifted.into_iter().map(GridCell::boundary));
    cells.extend(convert_cells(&base, eps, extent)?);
    Ok(merge_cells(&cells))
}

pub fn eps_distance_query(
    tree: &GpTree,
    table: &LookupTable,
    q: &Geometry,
    eps: f64,
) -> Result<Vec<ObjectId>> {
    eps_distance_query_with(tree, table, q, eps, &QueryOptions::default(), &mut QueryStats::default())
}

/// Objects within distance `eps` of `q`, ids ascending.
pub fn eps_distance_query_with(
    tree: &GpTree,
    table: &LookupTable,
    q: &Geometry,
    eps: f64,
    opts: &QueryOptions,
    stats: &mut QueryStats,
) -> Result<Vec<ObjectId>> {
    let t0 = Instant::now();
    let cells = eps_query_cells(tree, q, eps)?;
    let candidates = filter(tree, &cells, FilterMode::Distance, opts.true_hit_rule, stats);
    let t1 = Instant::now();
    let mut out = Vec::new();
    for cand in &candidates {
        if cand.hit_tag == HitTag::TrueHit {
            stats.true_hits += 1;
            out.push(cand.s_id);
            continue;
        }
        let entry = table.get(cand.s_id).ok_or(Error::MissingObject(cand.s_id))?;
        if distance(q, &entry.geometry) <= eps {
            stats.refined_accepted += 1;
            out.push(cand.s_id);
        } else {
            stats.refined_rejected += 1;
        }
    }
    stats.queries += 1;
    stats.filter_time += t1 - t0;
    stats.refine_time += t1.elapsed();
    out.sort_unstable();
    Ok(out)
}
