// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::clip::clip_params;
use super::distance::{point_segment_distance, segment_distance};
use super::sweep::sweep_line_intersects;
use super::{Coord, Envelope, Geometry, Polygon, Segment, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    Intersects,
    /// The query geometry covers the object.
    Contains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectRelation {
    Disjoint,
    Intersects,
    CoversRect,
}

/// Twice the signed area of (a, b, c); positive for a left turn.
pub fn orient(a: &Coord, b: &Coord, c: &Coord) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Closed segment intersection; touching within `EPS` counts.
pub fn segments_intersect(a: &Segment, b: &Segment) -> bool {
    segment_distance(a, b) <= EPS
}

pub fn segment_intersects_rect(seg: &Segment, r: &Envelope) -> bool {
    clip_params(seg, r).is_some()
}

/// True when some point of the segment lies strictly inside `r`.
pub fn segment_crosses_open_rect(seg: &Segment, r: &Envelope) -> bool {
    let Some((t0, t1)) = clip_params(seg, r) else {
        return false;
    };
    let t = (t0 + t1) / 2.0;
    let x = seg.start.x + t * (seg.end.x - seg.start.x);
    let y = seg.start.y + t * (seg.end.y - seg.start.y);
    x > r.min_x + EPS && x < r.max_x - EPS && y > r.min_y + EPS && y < r.max_y - EPS
}

pub fn point_on_segments<'a>(p: &Coord, segs: impl IntoIterator<Item = &'a Segment>) -> bool {
    segs.into_iter().any(|s| point_segment_distance(p, s) <= EPS)
}

fn on_ring_boundary(p: &Coord, ring: &[Coord]) -> bool {
    ring.windows(2)
        .any(|w| point_segment_distance(p, &Segment::new(w[0], w[1])) <= EPS)
}

/// Even-odd crossing count over all rings, ignoring the boundary.
fn crossings_odd(p: &Coord, poly: &Polygon) -> bool {
    let mut inside = false;
    for ring in poly.rings() {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Closed point-in-polygon: boundary points are inside; holes are outside.
pub fn point_in_polygon(p: &Coord, poly: &Polygon) -> bool {
    if poly.rings().any(|r| on_ring_boundary(p, r)) {
        return true;
    }
    crossings_odd(p, poly)
}

fn point_strictly_in_polygon(p: &Coord, poly: &Polygon) -> bool {
    !poly.rings().any(|r| on_ring_boundary(p, r)) && crossings_odd(p, poly)
}

/// Whether the closed geometry contains the coordinate.
pub(crate) fn geometry_contains_coord(g: &Geometry, p: &Coord) -> bool {
    match g {
        Geometry::Point(c) => c.dist(p) <= EPS,
        Geometry::LineString(cs) => cs
            .windows(2)
            .any(|w| point_segment_distance(p, &Segment::new(w[0], w[1])) <= EPS),
        Geometry::Polygon(poly) => point_in_polygon(p, poly),
    }
}

/// Classifies a geometry against a rectangle.
pub fn rect_relation(g: &Geometry, r: &Envelope) -> RectRelation {
    match g {
        Geometry::Point(c) => {
            if r.contains_coord(c) {
                RectRelation::Intersects
            } else {
                RectRelation::Disjoint
            }
        }
        Geometry::LineString(_) => {
            let mut hit = false;
            g.for_each_segment(|s| hit = hit || segment_intersects_rect(&s, r));
            if hit {
                RectRelation::Intersects
            } else {
                RectRelation::Disjoint
            }
        }
        Geometry::Polygon(poly) => {
            let segs = g.segments();
            polygon_rect_relation(poly, segs.iter(), r)
        }
    }
}

/// Polygon/rect classification using only the candidate boundary segments
/// (any superset of the segments touching `r`).
pub(crate) fn polygon_rect_relation<'a>(
    poly: &Polygon,
    candidates: impl Iterator<Item = &'a Segment>,
    r: &Envelope,
) -> RectRelation {
    let mut touches = false;
    for s in candidates {
        if let Some((t0, t1)) = clip_params(s, r) {
            touches = true;
            let t = (t0 + t1) / 2.0;
            let x = s.start.x + t * (s.end.x - s.start.x);
            let y = s.start.y + t * (s.end.y - s.start.y);
            if x > r.min_x + EPS && x < r.max_x - EPS && y > r.min_y + EPS && y < r.max_y - EPS {
                return RectRelation::Intersects;
            }
        }
    }
    // No boundary passes through the open rectangle, so it lies entirely on
    // one side of the boundary.
    if crossings_odd(&r.center(), poly) {
        RectRelation::CoversRect
    } else if touches {
        RectRelation::Intersects
    } else {
        RectRelation::Disjoint
    }
}

pub fn exact_predicate(q: &Geometry, s: &Geometry, theta: Predicate) -> bool {
    match theta {
        Predicate::Intersects => intersects(q, s),
        Predicate::Contains => covers(q, s),
    }
}

fn first_coord(g: &Geometry) -> Coord {
    *g.coords().next().expect("non-empty geometry")
}

pub(crate) fn intersects(a: &Geometry, b: &Geometry) -> bool {
    if !a.envelope().intersects(&b.envelope()) {
        return false;
    }
    match (a, b) {
        (Geometry::Point(p), other) | (other, Geometry::Point(p)) => {
            geometry_contains_coord(other, p)
        }
        _ => {
            if sweep_line_intersects(&a.segments(), &b.segments()) {
                return true;
            }
            // Boundaries are disjoint: one lies wholly inside the other or
            // they are apart.
            (matches!(a, Geometry::Polygon(_)) && geometry_contains_coord(a, &first_coord(b)))
                || (matches!(b, Geometry::Polygon(_))
                    && geometry_contains_coord(b, &first_coord(a)))
        }
    }
}

/// Whether `q` covers `s`: every point of `s` lies in the closed region of `q`.
fn covers(q: &Geometry, s: &Geometry) -> bool {
    if !q.envelope().contains_envelope(&s.envelope()) {
        return false;
    }
    match (q, s) {
        (Geometry::Point(a), _) => s.coords().all(|c| c.dist(a) <= EPS),
        (Geometry::LineString(_), Geometry::Point(p)) => geometry_contains_coord(q, p),
        (Geometry::LineString(_), Geometry::LineString(_)) => {
            let qsegs = q.segments();
            s.segments().iter().all(|seg| line_covers_segment(&qsegs, seg))
        }
        (Geometry::LineString(_), Geometry::Polygon(_)) => false,
        (Geometry::Polygon(poly), _) => {
            if !s.coords().all(|c| point_in_polygon(c, poly)) {
                return false;
            }
            let boundary = q.segments();
            let pieces_inside = s.segments().iter().all(|seg| {
                let mut ts = vec![0.0, 1.0];
                for b in &boundary {
                    split_params(seg, b, &mut ts);
                }
                ts.sort_by(f64::total_cmp);
                ts.windows(2).all(|w| {
                    w[1] - w[0] <= 0.0 || {
                        let t = (w[0] + w[1]) / 2.0;
                        let p = Coord::new(
                            seg.start.x + t * (seg.end.x - seg.start.x),
                            seg.start.y + t * (seg.end.y - seg.start.y),
                        );
                        point_in_polygon(&p, poly)
                    }
                })
            });
            if !pieces_inside {
                return false;
            }
            if let Geometry::Polygon(spoly) = s {
                // A hole of q inside s breaks coverage. Hole interiors never
                // meet s's boundary here, so one interior point decides.
                for hole in poly.interiors() {
                    if let Some(p) = ring_interior_point(hole) {
                        if point_strictly_in_polygon(&p, spoly) {
                            return false;
                        }
                    }
                }
            }
            true
        }
    }
}

/// Appends parameters along `seg` where it meets `other`.
fn split_params(seg: &Segment, other: &Segment, ts: &mut Vec<f64>) {
    let d = Coord::new(seg.end.x - seg.start.x, seg.end.y - seg.start.y);
    let len2 = d.x * d.x + d.y * d.y;
    if len2 == 0.0 || !segments_intersect(seg, other) {
        return;
    }
    let e = Coord::new(other.end.x - other.start.x, other.end.y - other.start.y);
    let denom = d.x * e.y - d.y * e.x;
    let project = |p: &Coord| ((p.x - seg.start.x) * d.x + (p.y - seg.start.y) * d.y) / len2;
    if denom.abs() > EPS * EPS {
        let w = Coord::new(other.start.x - seg.start.x, other.start.y - seg.start.y);
        let t = (w.x * e.y - w.y * e.x) / denom;
        ts.push(t.clamp(0.0, 1.0));
    }
    // Endpoint contacts and collinear overlaps.
    for p in [other.start, other.end] {
        if point_segment_distance(&p, seg) <= EPS {
            ts.push(project(&p).clamp(0.0, 1.0));
        }
    }
}

fn line_covers_segment(line: &[Segment], seg: &Segment) -> bool {
    let d = Coord::new(seg.end.x - seg.start.x, seg.end.y - seg.start.y);
    let len2 = d.x * d.x + d.y * d.y;
    if len2 == 0.0 {
        return point_on_segments(&seg.start, line);
    }
    let mut covered: Vec<(f64, f64)> = line
        .iter()
        .filter(|l| {
            let len = len2.sqrt();
            orient(&seg.start, &seg.end, &l.start).abs() / len <= EPS
                && orient(&seg.start, &seg.end, &l.end).abs() / len <= EPS
        })
        .map(|l| {
            let a = ((l.start.x - seg.start.x) * d.x + (l.start.y - seg.start.y) * d.y) / len2;
            let b = ((l.end.x - seg.start.x) * d.x + (l.end.y - seg.start.y) * d.y) / len2;
            (a.min(b), a.max(b))
        })
        .collect();
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = EPS / len2.sqrt();
    let mut reach = 0.0;
    for (a, b) in covered {
        if a > reach + tol {
            break;
        }
        reach = f64::max(reach, b);
    }
    reach >= 1.0 - tol
}

/// A point strictly inside a simple ring, found on a scanline through the
/// widest vertical gap between vertices.
fn ring_interior_point(ring: &[Coord]) -> Option<Coord> {
    let mut ys: Vec<f64> = ring.iter().map(|c| c.y).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let (lo, hi) = ys
        .windows(2)
        .map(|w| (w[0], w[1]))
        .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))?;
    let y = (lo + hi) / 2.0;
    let mut xs: Vec<f64> = ring
        .windows(2)
        .filter(|w| (w[0].y > y) != (w[1].y > y))
        .map(|w| w[0].x + (y - w[0].y) / (w[1].y - w[0].y) * (w[1].x - w[0].x))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2)
        .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
        .map(|w| Coord::new((w[0] + w[1]) / 2.0, y))
}
