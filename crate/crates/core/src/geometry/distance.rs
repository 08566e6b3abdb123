// SPDX-License-Identifier: Apache-2.0

use super::predicates::{intersects, orient};
use super::{Coord, Geometry, Segment};

pub fn point_segment_distance(p: &Coord, s: &Segment) -> f64 {
    let dx = s.end.x - s.start.x;
    let dy = s.end.y - s.start.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(&s.start);
    }
    let t = (((p.x - s.start.x) * dx + (p.y - s.start.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(&Coord::new(s.start.x + t * dx, s.start.y + t * dy))
}

/// Minimum distance between two closed segments; 0 on a proper crossing.
pub fn segment_distance(a: &Segment, b: &Segment) -> f64 {
    let o1 = orient(&a.start, &a.end, &b.start);
    let o2 = orient(&a.start, &a.end, &b.end);
    let o3 = orient(&b.start, &b.end, &a.start);
    let o4 = orient(&b.start, &b.end, &a.end);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return 0.0;
    }
    point_segment_distance(&a.start, b)
        .min(point_segment_distance(&a.end, b))
        .min(point_segment_distance(&b.start, a))
        .min(point_segment_distance(&b.end, a))
}

/// Planar minimum distance between two geometries; 0 when they intersect.
pub fn distance(a: &Geometry, b: &Geometry) -> f64 {
    if intersects(a, b) {
        return 0.0;
    }
    match (a, b) {
        (Geometry::Point(p), Geometry::Point(q)) => p.dist(q),
        (Geometry::Point(p), g) | (g, Geometry::Point(p)) => {
            let mut best = f64::INFINITY;
            g.for_each_segment(|s| best = best.min(point_segment_distance(p, &s)));
            best
        }
        _ => {
            let sa = a.segments();
            let mut sb: Vec<(Segment, f64, f64)> = b
                .segments()
                .into_iter()
                .map(|s| {
                    let e = s.envelope();
                    (s, e.min_x, e.max_x)
                })
                .collect();
            sb.sort_by(|p, q| p.1.total_cmp(&q.1));
            let mut best = f64::INFINITY;
            for s in &sa {
                let e = s.envelope();
                for (t, tmin, tmax) in &sb {
                    if *tmin > e.max_x + best {
                        break;
                    }
                    if *tmax + best < e.min_x {
                        continue;
                    }
                    best = best.min(segment_distance(s, t));
                }
            }
            best
        }
    }
}
