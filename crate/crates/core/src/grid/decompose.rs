// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{CellCode, GridCell, GridExtent, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::geometry::{
    clip_params, Coord, Envelope, Geometry, PreparedGeometry, RectRelation, Segment, EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionConfig {
    /// Largest number of segments a boundary cell may hold before it is split.
    pub seg: u32,
    pub max_level: u8,
    pub point_level: u8,
    /// Intersecting cells are always split until they are `fit_levels`
    /// levels below the deepest cell that still fits the object's envelope.
    /// `None` applies the segment-count rule alone, which leaves any object
    /// with few segments at the root cell.
    pub fit_levels: Option<u8>,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            seg: 20,
            max_level: 16,
            point_level: 16,
            fit_levels: Some(2),
        }
    }
}

impl DecompositionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seg == 0 {
            return Err(Error::InvalidConfig("seg must be positive".into()));
        }
        if self.max_level == 0 || self.max_level > MAX_LEVEL {
            return Err(Error::InvalidConfig(format!(
                "max level must be in [1, {MAX_LEVEL}], got {}",
                self.max_level
            )));
        }
        if self.point_level == 0 || self.point_level > self.max_level {
            return Err(Error::InvalidConfig(format!(
                "point level must be in [1, {}], got {}",
                self.max_level, self.point_level
            )));
        }
        Ok(())
    }
}

/// Cells of one geometry together with, for each boundary cell, the indices
/// (into `Geometry::segments`) of the segments touching it.
#[derive(Debug, Clone, Default)]
pub(crate) struct Decomposition {
    pub cells: Vec<GridCell>,
    pub cell_segments: Vec<Vec<u32>>,
}

pub fn decompose(
    g: &Geometry,
    cfg: &DecompositionConfig,
    extent: &GridExtent,
) -> Result<Vec<GridCell>> {
    decompose_detailed(g, cfg, extent).map(|d| d.cells)
}

fn classify(
    segs: &[Segment],
    candidates: &[u32],
    r: &Envelope,
    g: &Geometry,
    prepared: Option<&PreparedGeometry>,
) -> (RectRelation, Vec<u32>) {
    let mut hits = Vec::new();
    let mut crosses = false;
    for &i in candidates {
        let s = &segs[i as usize];
        if let Some((t0, t1)) = clip_params(s, r) {
            hits.push(i);
            crosses = crosses || inside_open(&point_at(s, (t0 + t1) / 2.0), r);
        }
    }
    let Geometry::Polygon(poly) = g else {
        let rel = if hits.is_empty() {
            RectRelation::Disjoint
        } else {
            RectRelation::Intersects
        };
        return (rel, hits);
    };
    if crosses {
        return (RectRelation::Intersects, hits);
    }
    let covers = match prepared {
        Some(p) => p.crossings_odd(&r.center()),
        None => {
            crate::geometry::polygon_rect_relation(poly, std::iter::empty(), r)
                == RectRelation::CoversRect
        }
    };
    let rel = if covers {
        RectRelation::CoversRect
    } else if hits.is_empty() {
        RectRelation::Disjoint
    } else {
        RectRelation::Intersects
    };
    (rel, hits)
}

fn point_at(s: &Segment, t: f64) -> Coord {
    Coord::new(
        s.start.x + t * (s.end.x - s.start.x),
        s.start.y + t * (s.end.y - s.start.y),
    )
}

fn inside_open(p: &Coord, r: &Envelope) -> bool {
    p.x > r.min_x + EPS && p.x < r.max_x - EPS && p.y > r.min_y + EPS && p.y < r.max_y - EPS
}

/// Polygons with more segments than this get a banded containment index
/// while being decomposed.
const PREPARE_ABOVE: usize = 64;

pub(crate) fn decompose_detailed(
    g: &Geometry,
    cfg: &DecompositionConfig,
    extent: &GridExtent,
) -> Result<Decomposition> {
    let prepared = (matches!(g, Geometry::Polygon(_)) && g.num_coords() > PREPARE_ABOVE)
        .then(|| PreparedGeometry::new(g));
    decompose_prepared(g, cfg, extent, prepared.as_ref())
}

/// As `decompose_detailed`, with an optional prepared copy of `g` for
/// polygon containment tests.
pub(crate) fn decompose_prepared(
    g: &Geometry,
    cfg: &DecompositionConfig,
    extent: &GridExtent,
    prepared: Option<&PreparedGeometry>,
) -> Result<Decomposition> {
    cfg.validate()?;
    let env = g.envelope();
    if !extent.bounds().contains_envelope(&env) {
        return Err(Error::OutsideExtent {
            geometry: env,
            extent: *extent.bounds(),
        });
    }
    if let Geometry::Point(p) = g {
        return Ok(Decomposition {
            cells: vec![GridCell::boundary(extent.locate(p, cfg.point_level))],
            cell_segments: vec![Vec::new()],
        });
    }

    let fit = extent.fit_level(&env, cfg.max_level);
    let force = cfg.fit_levels.map(|d| (fit + d).min(cfg.max_level)).unwrap_or(0);
    let segs = g.segments();
    let mut out = Decomposition::default();
    let all: Vec<u32> = (0..segs.len() as u32).collect();
    // Cells coarser than the fit level are larger than the envelope, so
    // they are never covered and are always split once a fit depth is set.
    let start = if cfg.fit_levels.is_some() { fit } else { 0 };
    let grown = Envelope {
        min_x: env.min_x - 2.0 * EPS,
        min_y: env.min_y - 2.0 * EPS,
        max_x: env.max_x + 2.0 * EPS,
        max_y: env.max_y + 2.0 * EPS,
    };
    let ((c0, c1), (r0, r1)) = extent.index_range(&grown, start);
    let mut first = Vec::new();
    for row in r0..=r1 {
        for col in c0..=c1 {
            first.push(CellCode::encode(col, row, start)?);
        }
    }
    first.sort_unstable_by_key(|c| std::cmp::Reverse(c.bits()));
    let mut stack: Vec<(CellCode, Vec<u32>)> = first.into_iter().map(|c| (c, all.clone())).collect();
    while let Some((cell, candidates)) = stack.pop() {
        let rect = extent.cell_bounds(cell);
        let (rel, hits) = classify(&segs, &candidates, &rect, g, prepared);
        match rel {
            RectRelation::Disjoint => {}
            RectRelation::CoversRect => {
                out.cells.push(GridCell::interior(cell));
                out.cell_segments.push(Vec::new());
            }
            RectRelation::Intersects => {
                let level = cell.level();
                let stop = level >= cfg.max_level
                    || (level >= force && hits.len() <= cfg.seg as usize);
                if stop {
                    out.cells.push(GridCell::boundary(cell));
                    out.cell_segments.push(hits);
                } else {
                    // Reverse so children pop in slot order.
                    for child in cell.children()?.into_iter().rev() {
                        stack.push((child, hits.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}
