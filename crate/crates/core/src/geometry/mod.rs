// SPDX-License-Identifier: Apache-2.0

//! Planar geometry model: points, linestrings and polygons with holes,
//! plus the exact predicates used during refinement.

mod clip;
mod distance;
mod predicates;
mod prepared;
mod sweep;
mod wkt;

pub use clip::{clip_to_cells, clip_to_rects, piece_point};
pub use distance::{distance, point_segment_distance, segment_distance};
pub use prepared::PreparedGeometry;
pub(crate) use clip::clip_params;
pub(crate) use predicates::{geometry_contains_coord, polygon_rect_relation};
pub use predicates::{
    exact_predicate, orient, point_in_polygon, point_on_segments, rect_relation,
    segment_crosses_open_rect, segment_intersects_rect, segments_intersect, Predicate,
    RectRelation,
};
pub use sweep::{brute_force_intersects, sweep_line_intersects};
pub use wkt::{parse_wkt, WktError};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance, in dataset units, for orientation and touching tests.
pub const EPS: f64 = 1e-12;

pub type ObjectId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Coord) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Coord {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    Point,
    LineString,
    Polygon,
}

/// A polygon with one exterior ring and any number of holes. Rings are
/// stored closed (first coordinate repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Coord>,
    interiors: Vec<Vec<Coord>>,
}

impl Polygon {
    pub fn new(exterior: Vec<Coord>, interiors: Vec<Vec<Coord>>) -> Result<Self> {
        let poly = Self {
            exterior,
            interiors,
        };
        for ring in poly.rings() {
            validate_ring(ring)?;
        }
        Ok(poly)
    }

    /// Builds a polygon from an exterior ring; the ring is closed if needed.
    pub fn from_exterior(mut exterior: Vec<Coord>) -> Result<Self> {
        if exterior.first() != exterior.last() {
            if let Some(&first) = exterior.first() {
                exterior.push(first);
            }
        }
        Self::new(exterior, Vec::new())
    }

    pub fn exterior(&self) -> &[Coord] {
        &self.exterior
    }

    pub fn interiors(&self) -> &[Vec<Coord>] {
        &self.interiors
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Coord]> {
        std::iter::once(self.exterior.as_slice()).chain(self.interiors.iter().map(Vec::as_slice))
    }
}

fn validate_ring(ring: &[Coord]) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::InvalidGeometry(format!(
            "polygon ring needs at least 4 coordinates, got {}",
            ring.len()
        )));
    }
    if ring.first() != ring.last() {
        return Err(Error::InvalidGeometry("polygon ring is not closed".into()));
    }
    // Non-adjacent edges of a simple ring must not touch. Edges are swept
    // by their left end so only x-overlapping pairs are compared.
    let n = ring.len() - 1;
    let edges: Vec<Segment> = (0..n).map(|i| Segment::new(ring[i], ring[i + 1])).collect();
    let boxes: Vec<Envelope> = edges
        .iter()
        .map(|e| Envelope {
            min_x: e.start.x.min(e.end.x),
            min_y: e.start.y.min(e.end.y),
            max_x: e.start.x.max(e.end.x),
            max_y: e.start.y.max(e.end.y),
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| boxes[a].min_x.total_cmp(&boxes[b].min_x));
    for (k, &a) in order.iter().enumerate() {
        let ba = &boxes[a];
        for &b in &order[k + 1..] {
            let bb = &boxes[b];
            if bb.min_x > ba.max_x + EPS {
                break;
            }
            let (i, j) = (a.min(b), a.max(b));
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if bb.min_y > ba.max_y + EPS || bb.max_y < ba.min_y - EPS {
                continue;
            }
            if segments_intersect(&edges[i], &edges[j]) {
                return Err(Error::InvalidGeometry(format!(
                    "ring self-intersects between edges {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Coord),
    LineString(Vec<Coord>),
    Polygon(Polygon),
}

impl Geometry {
    pub fn point(x: f64, y: f64) -> Self {
        Geometry::Point(Coord::new(x, y))
    }

    pub fn line_string(coords: Vec<Coord>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidGeometry(
                "linestring needs at least 2 coordinates".into(),
            ));
        }
        Ok(Geometry::LineString(coords))
    }

    /// Axis-aligned rectangle as a polygon.
    pub fn rect(env: &Envelope) -> Self {
        let ring = vec![
            Coord::new(env.min_x, env.min_y),
            Coord::new(env.max_x, env.min_y),
            Coord::new(env.max_x, env.max_y),
            Coord::new(env.min_x, env.max_y),
            Coord::new(env.min_x, env.min_y),
        ];
        Geometry::Polygon(Polygon {
            exterior: ring,
            interiors: Vec::new(),
        })
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Point(_) => GeometryKind::Point,
            Geometry::LineString(_) => GeometryKind::LineString,
            Geometry::Polygon(_) => GeometryKind::Polygon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.coords().all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        match self {
            Geometry::Point(_) => Ok(()),
            Geometry::LineString(cs) if cs.len() < 2 => Err(Error::InvalidGeometry(
                "linestring needs at least 2 coordinates".into(),
            )),
            Geometry::LineString(_) => Ok(()),
            Geometry::Polygon(p) => p.rings().try_for_each(validate_ring),
        }
    }

    pub fn coords(&self) -> Box<dyn Iterator<Item = &Coord> + '_> {
        match self {
            Geometry::Point(c) => Box::new(std::iter::once(c)),
            Geometry::LineString(cs) => Box::new(cs.iter()),
            Geometry::Polygon(p) => Box::new(p.rings().flatten()),
        }
    }

    pub fn num_coords(&self) -> usize {
        match self {
            Geometry::Point(_) => 1,
            Geometry::LineString(cs) => cs.len(),
            Geometry::Polygon(p) => p.rings().map(<[Coord]>::len).sum(),
        }
    }

    /// Number of parts contributing segments: rings for polygons, 1 for a
    /// linestring, and 1 for a point (which has no segments).
    pub fn num_parts(&self) -> usize {
        match self {
            Geometry::Point(_) | Geometry::LineString(_) => 1,
            Geometry::Polygon(p) => 1 + p.interiors.len(),
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        self.for_each_segment(|s| out.push(s));
        out
    }

    pub fn for_each_segment(&self, mut f: impl FnMut(Segment)) {
        let mut walk = |cs: &[Coord]| {
            for w in cs.windows(2) {
                f(Segment::new(w[0], w[1]));
            }
        };
        match self {
            Geometry::Point(_) => {}
            Geometry::LineString(cs) => walk(cs),
            Geometry::Polygon(p) => p.rings().for_each(walk),
        }
    }

    pub fn envelope(&self) -> Envelope {
        Envelope::from_coords(self.coords()).expect("geometry has at least one coordinate")
    }

    /// Area centroid for polygons, length-weighted centroid for
    /// linestrings, the coordinate itself for points.
    pub fn centroid(&self) -> Coord {
        match self {
            Geometry::Point(c) => *c,
            Geometry::LineString(cs) => {
                let (mut sx, mut sy, mut total) = (0.0, 0.0, 0.0);
                for w in cs.windows(2) {
                    let len = w[0].dist(&w[1]);
                    sx += len * (w[0].x + w[1].x) / 2.0;
                    sy += len * (w[0].y + w[1].y) / 2.0;
                    total += len;
                }
                if total > 0.0 {
                    Coord::new(sx / total, sy / total)
                } else {
                    cs[0]
                }
            }
            Geometry::Polygon(p) => {
                let (mut sx, mut sy, mut area) = (0.0, 0.0, 0.0);
                for (i, ring) in p.rings().enumerate() {
                    let (rx, ry, ra) = ring_moments(ring);
                    // Holes subtract regardless of their winding.
                    let sign = if (i == 0) == (ra >= 0.0) { 1.0 } else { -1.0 };
                    sx += sign * rx;
                    sy += sign * ry;
                    area += sign * ra;
                }
                if area.abs() > f64::MIN_POSITIVE {
                    Coord::new(sx / area, sy / area)
                } else {
                    self.envelope().center()
                }
            }
        }
    }

    /// Largest distance from `from` to any point of the geometry.
    pub fn max_distance_from(&self, from: &Coord) -> f64 {
        self.coords().map(|c| c.dist(from)).fold(0.0, f64::max)
    }
}

/// Returns (Σ cx·A_i, Σ cy·A_i, A) for a ring using the shoelace formula.
fn ring_moments(ring: &[Coord]) -> (f64, f64, f64) {
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for w in ring.windows(2) {
        let cross = w[0].x * w[1].y - w[1].x * w[0].y;
        a += cross;
        cx += (w[0].x + w[1].x) * cross;
        cy += (w[0].y + w[1].y) * cross;
    }
    (cx / 6.0, cy / 6.0, a / 2.0)
}

impl fmt::Display for Geometry {
    /// Writes the geometry as WKT.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq(f: &mut fmt::Formatter<'_>, cs: &[Coord]) -> fmt::Result {
            f.write_str("(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{} {}", c.x, c.y)?;
            }
            f.write_str(")")
        }
        match self {
            Geometry::Point(c) => write!(f, "POINT ({} {})", c.x, c.y),
            Geometry::LineString(cs) => {
                f.write_str("LINESTRING ")?;
                seq(f, cs)
            }
            Geometry::Polygon(p) => {
                f.write_str("POLYGON (")?;
                for (i, ring) in p.rings().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    seq(f, ring)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialObject {
    pub id: ObjectId,
    pub geometry: Geometry,
}

impl SpatialObject {
    pub fn new(id: ObjectId, geometry: Geometry) -> Self {
        Self { id, geometry }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Coord,
    pub end: Coord,
}

impl Segment {
    pub const fn new(start: Coord, end: Coord) -> Self {
        Self { start, end }
    }

    pub fn envelope(&self) -> Envelope {
        Envelope {
            min_x: self.start.x.min(self.end.x),
            min_y: self.start.y.min(self.end.y),
            max_x: self.start.x.max(self.end.x),
            max_y: self.start.y.max(self.end.y),
        }
    }

    pub fn midpoint(&self) -> Coord {
        Coord::new(
            (self.start.x + self.end.x) / 2.0,
            (self.start.y + self.end.y) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Envelope {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let env = Self {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        let finite = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite());
        if !finite || min_x > max_x || min_y > max_y {
            return Err(Error::InvalidEnvelope(env));
        }
        Ok(env)
    }

    pub fn from_coords<'a>(coords: impl IntoIterator<Item = &'a Coord>) -> Option<Self> {
        let mut iter = coords.into_iter();
        let first = iter.next()?;
        let mut env = Envelope {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for c in iter {
            env.expand_to(c);
        }
        Some(env)
    }

    pub fn expand_to(&mut self, c: &Coord) {
        self.min_x = self.min_x.min(c.x);
        self.min_y = self.min_y.min(c.y);
        self.max_x = self.max_x.max(c.x);
        self.max_y = self.max_y.max(c.y);
    }

    pub fn merge(&self, other: &Envelope) -> Envelope {
        Envelope {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Coord {
        Coord::new(
            (self.min_x + self.max_x) / 2.0,
            (self.min_y + self.max_y) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    /// Closed-rectangle overlap test.
    pub fn intersects(&self, other: &Envelope) -> bool {
        self.min_x <= other.max_x + EPS
            && other.min_x <= self.max_x + EPS
            && self.min_y <= other.max_y + EPS
            && other.min_y <= self.max_y + EPS
    }

    pub fn contains_envelope(&self, other: &Envelope) -> bool {
        self.min_x <= other.min_x + EPS
            && self.min_y <= other.min_y + EPS
            && other.max_x <= self.max_x + EPS
            && other.max_y <= self.max_y + EPS
    }

    pub fn contains_coord(&self, c: &Coord) -> bool {
        c.x >= self.min_x - EPS
            && c.x <= self.max_x + EPS
            && c.y >= self.min_y - EPS
            && c.y <= self.max_y + EPS
    }

    /// Minimum distance from a coordinate to the closed rectangle.
    pub fn distance_to_coord(&self, c: &Coord) -> f64 {
        let dx = (self.min_x - c.x).max(0.0).max(c.x - self.max_x);
        let dy = (self.min_y - c.y).max(0.0).max(c.y - self.max_y);
        dx.hypot(dy)
    }

    pub fn distance_to_envelope(&self, other: &Envelope) -> f64 {
        let dx = (self.min_x - other.max_x).max(0.0).max(other.min_x - self.max_x);
        let dy = (self.min_y - other.max_y).max(0.0).max(other.min_y - self.max_y);
        dx.hypot(dy)
    }

    /// Largest distance from a coordinate to any point of the rectangle.
    pub fn max_distance_to_coord(&self, c: &Coord) -> f64 {
        let dx = (c.x - self.min_x).abs().max((c.x - self.max_x).abs());
        let dy = (c.y - self.min_y).abs().max((c.y - self.max_y).abs());
        dx.hypot(dy)
    }

    pub fn expand_by(&self, d: f64) -> Envelope {
        Envelope {
            min_x: self.min_x - d,
            min_y: self.min_y - d,
            max_x: self.max_x + d,
            max_y: self.max_y + d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> Geometry {
        parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap()
    }

    #[test]
    fn segment_counts() {
        assert!(Geometry::point(1.0, 2.0).segments().is_empty());
        assert_eq!(unit_square().segments().len(), 4);
        let coords: Vec<Coord> = (0..51).map(|i| Coord::new(i as f64, 0.0)).collect();
        let line = Geometry::line_string(coords).unwrap();
        assert_eq!(line.segments().len(), 50);
    }

    #[test]
    fn segment_count_matches_coords_minus_parts() {
        let g = parse_wkt(
            "POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (2 2, 3 2, 3 3, 2 2), (5 5, 6 5, 6 6, 5 6, 5 5))",
        )
        .unwrap();
        assert_eq!(g.segments().len(), g.num_coords() - g.num_parts());
    }

    #[test]
    fn envelopes() {
        let p = Geometry::point(3.0, 4.0).envelope();
        assert_eq!((p.min_x, p.min_y, p.max_x, p.max_y), (3.0, 4.0, 3.0, 4.0));
        let l = parse_wkt("LINESTRING (0 0, 2 1)").unwrap().envelope();
        assert_eq!((l.min_x, l.min_y, l.max_x, l.max_y), (0.0, 0.0, 2.0, 1.0));
        let s = unit_square().envelope();
        assert_eq!((s.min_x, s.min_y, s.max_x, s.max_y), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn invalid_rings_rejected() {
        // Bow-tie.
        let bow = vec![
            Coord::new(0.0, 0.0),
            Coord::new(1.0, 1.0),
            Coord::new(1.0, 0.0),
            Coord::new(0.0, 1.0),
            Coord::new(0.0, 0.0),
        ];
        assert!(Polygon::new(bow, vec![]).is_err());
        let short = vec![Coord::new(0.0, 0.0), Coord::new(1.0, 0.0), Coord::new(0.0, 0.0)];
        assert!(Polygon::new(short, vec![]).is_err());
        assert!(Geometry::line_string(vec![Coord::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn centroids() {
        let c = unit_square().centroid();
        assert!((c.x - 0.5).abs() < 1e-12 && (c.y - 0.5).abs() < 1e-12);
        let l = parse_wkt("LINESTRING (0 0, 2 0)").unwrap().centroid();
        assert_eq!(l, Coord::new(1.0, 0.0));
        // Square with a hole in the right half shifts the centroid left.
        let holed =
            parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (2 1, 3 1, 3 3, 2 3, 2 1))").unwrap();
        assert!(holed.centroid().x < 2.0);
    }

    #[test]
    fn wkt_display_round_trips() {
        for text in [
            "POINT (1.5 -2)",
            "LINESTRING (0 0, 1 1, 2 0)",
            "POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (2 2, 3 2, 3 3, 2 2))",
        ] {
            let g = parse_wkt(text).unwrap();
            assert_eq!(g.to_string(), text);
            assert_eq!(parse_wkt(&g.to_string()).unwrap(), g);
        }
    }

    fn pairwise_simple(ring: &[Coord]) -> bool {
        let n = ring.len() - 1;
        let e: Vec<Segment> = (0..n).map(|i| Segment::new(ring[i], ring[i + 1])).collect();
        (0..n).all(|i| {
            (i + 2..n).all(|j| (i == 0 && j == n - 1) || !segments_intersect(&e[i], &e[j]))
        })
    }

    proptest! {
        #[test]
        fn ring_check_matches_pairwise(
            pts in prop::collection::vec((0i32..12, 0i32..12), 3..14),
        ) {
            let mut ring: Vec<Coord> = pts.iter().map(|&(x, y)| Coord::new(x as f64, y as f64)).collect();
            ring.push(ring[0]);
            prop_assume!(ring.windows(2).all(|w| w[0] != w[1]));
            prop_assert_eq!(validate_ring(&ring).is_ok(), pairwise_simple(&ring));
        }
    }
}
