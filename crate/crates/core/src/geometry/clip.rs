// SPDX-License-Identifier: Apache-2.0

use super::{Coord, Envelope, Geometry, Segment, EPS};
use crate::grid::{GridCell, GridExtent};

/// Liang–Barsky clip of a segment against a closed rectangle (grown by
/// `EPS`). Returns the parameter interval of the piece inside, if any.
pub(crate) fn clip_params(seg: &Segment, r: &Envelope) -> Option<(f64, f64)> {
    let (a, b) = (seg.start, seg.end);
    if a.x.max(b.x) < r.min_x - EPS
        || a.x.min(b.x) > r.max_x + EPS
        || a.y.max(b.y) < r.min_y - EPS
        || a.y.min(b.y) > r.max_y + EPS
    {
        return None;
    }
    let dx = seg.end.x - seg.start.x;
    let dy = seg.end.y - seg.start.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [
        (-dx, seg.start.x - (r.min_x - EPS)),
        (dx, (r.max_x + EPS) - seg.start.x),
        (-dy, seg.start.y - (r.min_y - EPS)),
        (dy, (r.max_y + EPS) - seg.start.y),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                if t > t1 {
                    return None;
                }
                t0 = t0.max(t);
            } else {
                if t < t0 {
                    return None;
                }
                t1 = t1.min(t);
            }
        }
    }
    Some((t0, t1))
}

fn at(seg: &Segment, t: f64) -> Coord {
    Coord::new(
        seg.start.x + t * (seg.end.x - seg.start.x),
        seg.start.y + t * (seg.end.y - seg.start.y),
    )
}

/// A point of `seg` lying inside the closed rectangle, if the two meet.
pub fn piece_point(seg: &Segment, r: &Envelope) -> Option<Coord> {
    clip_params(seg, r).map(|(t0, t1)| at(seg, (t0 + t1) / 2.0))
}

/// Segments of `g` that touch at least one of the rectangles. Segments are
/// returned whole, in geometry order.
pub fn clip_to_rects(g: &Geometry, rects: &[Envelope]) -> Vec<Segment> {
    let mut out = Vec::new();
    g.for_each_segment(|s| {
        if rects.iter().any(|r| clip_params(&s, r).is_some()) {
            out.push(s);
        }
    });
    out
}

/// Segments of `g` that intersect the union of the cells' rectangles.
pub fn clip_to_cells(g: &Geometry, cells: &[GridCell], extent: &GridExtent) -> Vec<Segment> {
    let rects: Vec<Envelope> = cells.iter().map(|c| extent.cell_bounds(c.cell)).collect();
    clip_to_rects(g, &rects)
}
