// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::time::Instant;

use super::{filter, CandidateMatch, FilterMode, HitTag, Overlap, QueryOptions, QueryStats};
use crate::error::{Error, Result};
use crate::geometry::{
    exact_predicate, Coord, geometry_contains_coord, piece_point, segment_intersects_rect,
    sweep_line_intersects, Envelope, Geometry, ObjectId, Predicate, PreparedGeometry, Segment,
};
use crate::grid::{decompose_prepared, DecompositionConfig, GridCell, GridExtent};
use crate::tree::{GpTree, LookupEntry, LookupTable};

/// A rasterized query geometry.
#[derive(Debug, Clone)]
pub struct QueryPlan {
    pub geometry: Geometry,
    pub cells: Vec<GridCell>,
    cell_segments: Vec<Vec<u32>>,
    segments: Vec<Segment>,
    envelope: Envelope,
    locator: PreparedGeometry,
    extent: GridExtent,
}

impl QueryPlan {
    /// Decomposes `q` with the tree's grid settings.
    pub fn new(q: &Geometry, tree: &GpTree) -> Result<Self> {
        Self::with_options(q, tree, &QueryOptions::default())
    }

    pub fn with_options(q: &Geometry, tree: &GpTree, opts: &QueryOptions) -> Result<Self> {
        q.validate()?;
        let locator = PreparedGeometry::new(q);
        let d = decompose_prepared(q, &query_config(tree, opts), tree.extent(), Some(&locator))?;
        Ok(Self {
            geometry: q.clone(),
            cells: d.cells,
            cell_segments: d.cell_segments,
            segments: q.segments(),
            envelope: q.envelope(),
            locator,
            extent: *tree.extent(),
        })
    }
}

/// Grid settings used to rasterize query geometries.
pub(crate) fn query_config(tree: &GpTree, opts: &QueryOptions) -> DecompositionConfig {
    let mut c = *tree.config();
    c.fit_levels = Some(c.fit_levels.unwrap_or(0) + opts.query_fit_levels);
    c
}

pub fn range_query(
    tree: &GpTree,
    table: &LookupTable,
    q: &Geometry,
    theta: Predicate,
) -> Result<Vec<ObjectId>> {
    range_query_with(tree, table, q, theta, &QueryOptions::default(), &mut QueryStats::default())
}

/// Range query returning ids in ascending order.
pub fn range_query_with(
    tree: &GpTree,
    table: &LookupTable,
    q: &Geometry,
    theta: Predicate,
    opts: &QueryOptions,
    stats: &mut QueryStats,
) -> Result<Vec<ObjectId>> {
    let t0 = Instant::now();
    let plan = QueryPlan::with_options(q, tree, opts)?;
    let candidates = filter(tree, &plan.cells, FilterMode::Range(theta), opts.true_hit_rule, stats);
    let t1 = Instant::now();
    let mut out = Vec::new();
    for cand in &candidates {
        if cand.hit_tag == HitTag::TrueHit {
            stats.true_hits += 1;
            out.push(cand.s_id);
            continue;
        }
        if refine_inner(&plan, cand, table, theta, stats)? {
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

/// Decides an uncertain candidate by looking only at the parts of both
/// geometries inside the overlapping cells.
pub fn refine_candidate(
    plan: &QueryPlan,
    cand: &CandidateMatch,
    table: &LookupTable,
    theta: Predicate,
) -> Result<bool> {
    refine_inner(plan, cand, table, theta, &mut QueryStats::default())
}

/// Query and object segments handed to the segment intersection test while
/// refining `cand`, deduplicated.
pub fn clipped_parts(
    plan: &QueryPlan,
    cand: &CandidateMatch,
    table: &LookupTable,
) -> Result<(Vec<Segment>, Vec<Segment>)> {
    let entry = table.get(cand.s_id).ok_or(Error::MissingObject(cand.s_id))?;
    let mut qs = BTreeSet::new();
    let mut ss = BTreeSet::new();
    for ov in &cand.overlaps {
        let (a, b) = overlap_segments(plan, entry, ov);
        qs.extend(a);
        ss.extend(b);
    }
    Ok((
        qs.into_iter().map(|i| plan.segments[i as usize]).collect(),
        ss.into_iter().map(|i| entry.segments[i as usize]).collect(),
    ))
}

fn refine_inner(
    plan: &QueryPlan,
    cand: &CandidateMatch,
    table: &LookupTable,
    theta: Predicate,
    stats: &mut QueryStats,
) -> Result<bool> {
    let entry = table.get(cand.s_id).ok_or(Error::MissingObject(cand.s_id))?;
    let point_involved =
        matches!(plan.geometry, Geometry::Point(_)) || matches!(entry.geometry, Geometry::Point(_));
    if !plan.envelope.intersects(&entry.envelope) {
        return Ok(false);
    }
    if theta == Predicate::Contains || point_involved {
        return Ok(exact_predicate(&plan.geometry, &entry.geometry, theta));
    }
    for ov in &cand.overlaps {
        if meets_in_cell(plan, entry, ov, stats) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn touching(segs: &[Segment], list: &[u32], r: &Envelope) -> Vec<u32> {
    list.iter()
        .copied()
        .filter(|&i| segment_intersects_rect(&segs[i as usize], r))
        .collect()
}

/// Indices of the query and object segments touching the overlap cell, both
/// sides on boundary cells; empty otherwise.
fn overlap_segments(plan: &QueryPlan, entry: &LookupEntry, ov: &Overlap) -> (Vec<u32>, Vec<u32>) {
    let qi = ov.query_cell as usize;
    let Some(si) = entry.owning_cell(&ov.cell) else {
        return (Vec::new(), Vec::new());
    };
    if plan.cells[qi].interior || entry.cells[si].interior {
        return (Vec::new(), Vec::new());
    }
    let r = plan.extent.cell_bounds(ov.cell);
    (
        touching(&plan.segments, &plan.cell_segments[qi], &r),
        touching(&entry.segments, &entry.cell_segments[si], &r),
    )
}

/// Whether the object touches the closed cell `r`, given candidate segment
/// indices covering every segment that touches it.
fn touches_cell(
    g: &Geometry,
    segs: &[Segment],
    list: &[u32],
    r: &Envelope,
    contains: impl Fn(&Coord) -> bool,
) -> bool {
    list.iter()
        .any(|&i| segment_intersects_rect(&segs[i as usize], r))
        || (matches!(g, Geometry::Polygon(_)) && contains(&r.center()))
}

fn meets_in_cell(plan: &QueryPlan, entry: &LookupEntry, ov: &Overlap, stats: &mut QueryStats) -> bool {
    let qi = ov.query_cell as usize;
    let Some(si) = entry.owning_cell(&ov.cell) else {
        return false;
    };
    let r = plan.extent.cell_bounds(ov.cell);
    let q_int = plan.cells[qi].interior;
    let s_int = entry.cells[si].interior;
    if q_int && s_int {
        return true;
    }
    if q_int {
        let contains = |p: &Coord| geometry_contains_coord(&entry.geometry, p);
        return touches_cell(&entry.geometry, &entry.segments, &entry.cell_segments[si], &r, contains);
    }
    if s_int {
        let contains = |p: &Coord| plan.locator.contains(p);
        return touches_cell(&plan.geometry, &plan.segments, &plan.cell_segments[qi], &r, contains);
    }
    let (qi_segs, si_segs) = overlap_segments(plan, entry, ov);
    let qs: Vec<Segment> = qi_segs.iter().map(|&i| plan.segments[i as usize]).collect();
    let ss: Vec<Segment> = si_segs.iter().map(|&i| entry.segments[i as usize]).collect();
    stats.clipped_segments += (qs.len() + ss.len()) as u64;
    if sweep_line_intersects(&qs, &ss) {
        return true;
    }
    // No boundary crossing inside the cell: each clipped piece lies wholly
    // inside or outside the other geometry.
    let inside = |g: &Geometry, pieces: &[Segment], contains: &dyn Fn(&Coord) -> bool| {
        matches!(g, Geometry::Polygon(_))
            && pieces
                .iter()
                .filter_map(|s| piece_point(s, &r))
                .any(|p| contains(&p))
    };
    let in_q = |p: &Coord| plan.locator.contains(p);
    let in_s = |p: &Coord| geometry_contains_coord(&entry.geometry, p);
    if inside(&plan.geometry, &ss, &in_q) || inside(&entry.geometry, &qs, &in_s) {
        return true;
    }
    matches!(plan.geometry, Geometry::Polygon(_))
        && matches!(entry.geometry, Geometry::Polygon(_))
        && in_q(&r.center())
        && in_s(&r.center())
}
