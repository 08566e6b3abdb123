// SPDX-License-Identifier: Apache-2.0

use super::distance::point_segment_distance;
use super::{Coord, Envelope, Geometry, Segment, EPS};

/// A geometry with its segments bucketed into horizontal bands, for
/// repeated point containment tests against the same geometry.
#[derive(Debug, Clone)]
pub struct PreparedGeometry {
    point: Option<Coord>,
    polygon: bool,
    envelope: Envelope,
    segments: Vec<Segment>,
    /// Segment indices of band `b` are `items[starts[b]..starts[b + 1]]`.
    starts: Vec<u32>,
    items: Vec<u32>,
    y0: f64,
    dy: f64,
}

impl PreparedGeometry {
    pub fn new(g: &Geometry) -> Self {
        let envelope = g.envelope();
        let segments = g.segments();
        let n = (segments.len() / 2).clamp(1, 1024);
        let height = envelope.height();
        let dy = if height > 0.0 { height / n as f64 } else { 1.0 };
        let n = if height > 0.0 { n } else { 1 };
        let slack = EPS + dy * 1e-9;
        let band = |y: f64| (((y - envelope.min_y) / dy).floor().max(0.0) as usize).min(n - 1);
        let spans: Vec<(usize, usize)> = segments
            .iter()
            .map(|s| (band(s.start.y.min(s.end.y) - slack), band(s.start.y.max(s.end.y) + slack)))
            .collect();
        let mut starts = vec![0u32; n + 1];
        for &(lo, hi) in &spans {
            for b in lo..=hi {
                starts[b + 1] += 1;
            }
        }
        for b in 0..n {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut items = vec![0u32; starts[n] as usize];
        for (i, &(lo, hi)) in spans.iter().enumerate() {
            for b in lo..=hi {
                items[fill[b] as usize] = i as u32;
                fill[b] += 1;
            }
        }
        Self {
            point: match g {
                Geometry::Point(c) => Some(*c),
                _ => None,
            },
            polygon: matches!(g, Geometry::Polygon(_)),
            envelope,
            segments,
            y0: envelope.min_y,
            dy,
            starts,
            items,
        }
    }

    /// Whether the closed geometry contains `p`.
    pub fn contains(&self, p: &Coord) -> bool {
        if let Some(c) = self.point {
            return c.dist(p) <= EPS;
        }
        let e = &self.envelope;
        if p.x < e.min_x - EPS || p.x > e.max_x + EPS || p.y < e.min_y - EPS || p.y > e.max_y + EPS {
            return false;
        }
        if self
            .band(p)
            .iter()
            .any(|&i| point_segment_distance(p, &self.segments[i as usize]) <= EPS)
        {
            return true;
        }
        self.polygon && self.crossings_odd(p)
    }

    fn band(&self, p: &Coord) -> &[u32] {
        let n = self.starts.len() - 1;
        let b = (((p.y - self.y0) / self.dy).floor().max(0.0) as usize).min(n - 1);
        &self.items[self.starts[b] as usize..self.starts[b + 1] as usize]
    }

    /// Even-odd crossing parity of a polygon, ignoring the boundary.
    pub(crate) fn crossings_odd(&self, p: &Coord) -> bool {
        let e = &self.envelope;
        if p.y < e.min_y || p.y > e.max_y {
            return false;
        }
        let mut inside = false;
        for &i in self.band(p) {
            let Segment { start: a, end: b } = self.segments[i as usize];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}
