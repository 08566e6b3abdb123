// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};
use std::io::Write;

use gptree::geometry::Polygon;
use gptree::{Coord, Envelope, Geometry, SpatialObject};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Relative weights of the generated geometry kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindMix {
    pub point: f64,
    pub linestring: f64,
    pub polygon: f64,
}

impl KindMix {
    pub const POINTS: KindMix = KindMix { point: 1.0, linestring: 0.0, polygon: 0.0 };
    pub const LINESTRINGS: KindMix = KindMix { point: 0.0, linestring: 1.0, polygon: 0.0 };
    pub const MIXED: KindMix = KindMix { point: 1.0, linestring: 1.0, polygon: 1.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub count: usize,
    pub mix: KindMix,
    pub extent: Envelope,
    pub seed: u64,
    /// Number of Gaussian clusters; 0 places objects uniformly.
    pub clusters: usize,
    /// Cluster standard deviation as a fraction of the extent width.
    pub cluster_sigma: f64,
    pub avg_segments: usize,
    pub avg_vertices: usize,
    /// Linestring step length as a fraction of the extent width.
    pub step: f64,
    /// Polygon radius as a fraction of the extent width.
    pub polygon_radius: f64,
}

impl SynthSpec {
    pub fn new(count: usize, mix: KindMix, extent: Envelope, seed: u64) -> Self {
        Self {
            count,
            mix,
            extent,
            seed,
            clusters: 20,
            cluster_sigma: 0.05,
            avg_segments: 19,
            avg_vertices: 12,
            step: 0.0005,
            polygon_radius: 0.002,
        }
    }
}

struct Gen<'a> {
    spec: &'a SynthSpec,
    rng: ChaCha8Rng,
    centers: Vec<Coord>,
}

impl Gen<'_> {
    fn uniform(&mut self, margin: f64) -> Coord {
        let e = &self.spec.extent;
        let m = margin.min(e.width() / 2.0).min(e.height() / 2.0);
        Coord::new(
            self.rng.random_range(e.min_x + m..=e.max_x - m),
            self.rng.random_range(e.min_y + m..=e.max_y - m),
        )
    }

    /// Anchor point at least `margin` inside the extent.
    fn anchor(&mut self, margin: f64) -> Coord {
        if self.centers.is_empty() {
            return self.uniform(margin);
        }
        let e = self.spec.extent;
        let c = self.centers[self.rng.random_range(0..self.centers.len())];
        let normal = Normal::new(0.0, self.spec.cluster_sigma * e.width()).expect("finite sigma");
        for _ in 0..32 {
            let p = Coord::new(c.x + normal.sample(&mut self.rng), c.y + normal.sample(&mut self.rng));
            if p.x >= e.min_x + margin
                && p.x <= e.max_x - margin
                && p.y >= e.min_y + margin
                && p.y <= e.max_y - margin
            {
                return p;
            }
        }
        self.uniform(margin)
    }

    fn around(&mut self, avg: usize, min: usize) -> usize {
        let half = avg / 2;
        self.rng.random_range(avg - half..=avg + half).max(min)
    }

    fn linestring(&mut self) -> Geometry {
        let e = self.spec.extent;
        let step = self.spec.step * e.width();
        let n = self.around(self.spec.avg_segments, 1);
        let start = self.anchor(0.0);
        let mut pts = vec![start];
        let mut heading = self.rng.random_range(0.0..TAU);
        while pts.len() <= n {
            heading += self.rng.random_range(-0.6..0.6);
            let last = *pts.last().expect("non-empty");
            let mut next = Coord::new(last.x + step * heading.cos(), last.y + step * heading.sin());
            if !e.contains_coord(&next) {
                heading += PI;
                next = Coord::new(last.x + step * heading.cos(), last.y + step * heading.sin());
                if !e.contains_coord(&next) {
                    next = Coord::new(next.x.clamp(e.min_x, e.max_x), next.y.clamp(e.min_y, e.max_y));
                }
            }
            if next != last {
                pts.push(next);
            }
        }
        Geometry::line_string(pts).expect("at least two distinct points")
    }

    /// Perturbed circle: sorted angles, radii jittered inward.
    fn polygon(&mut self) -> Geometry {
        let r = self.spec.polygon_radius * self.spec.extent.width();
        let n = self.around(self.spec.avg_vertices, 3);
        let c = self.anchor(r);
        loop {
            let mut angles: Vec<f64> = (0..n).map(|_| self.rng.random_range(0.0..TAU)).collect();
            angles.sort_by(f64::total_cmp);
            let ring: Vec<Coord> = angles
                .iter()
                .map(|a| {
                    let d = r * self.rng.random_range(0.6..=1.0);
                    Coord::new(c.x + d * a.cos(), c.y + d * a.sin())
                })
                .collect();
            if let Ok(p) = Polygon::from_exterior(ring) {
                return Geometry::Polygon(p);
            }
        }
    }
}

pub const KIND_STREAM: u64 = 1;

/// Deterministic synthetic dataset for a seed.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<SpatialObject>> {
    let m = spec.mix;
    let total = m.point + m.linestring + m.polygon;
    if spec.count == 0 {
        return Err(CliError::Usage("count must be positive".into()));
    }
    if total.is_nan() || total <= 0.0 || m.point < 0.0 || m.linestring < 0.0 || m.polygon < 0.0 {
        return Err(CliError::Usage("kind weights must be non-negative with a positive sum".into()));
    }
    let mut g = Gen {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        centers: Vec::new(),
    };
    for _ in 0..spec.clusters {
        let c = g.uniform(0.0);
        g.centers.push(c);
    }
    // Kinds come from their own stream so the shape draws do not shift them.
    let mut kinds = ChaCha8Rng::seed_from_u64(spec.seed);
    kinds.set_stream(KIND_STREAM);
    let mut out = Vec::with_capacity(spec.count);
    for id in 0..spec.count as u64 {
        let u = kinds.random::<f64>() * total;
        let geometry = if u < m.point {
            Geometry::Point(g.anchor(0.0))
        } else if u < m.point + m.linestring {
            g.linestring()
        } else {
            g.polygon()
        };
        out.push(SpatialObject::new(id, geometry));
    }
    Ok(out)
}

/// Shape of generated query geometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QueryShape {
    Point,
    /// Axis-aligned window covering `area` of the extent.
    Rect { area: f64 },
    /// Irregular ring with `vertices` vertices covering `area` of the extent.
    Polygon { area: f64, vertices: usize },
}

/// Block-group sized windows: 0.1% of the extent, 305 vertices.
pub const BG_WINDOW: QueryShape = QueryShape::Polygon { area: 0.001, vertices: 305 };

fn ring_area(ring: &[Coord]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Smooth star-shaped ring around the origin: evenly spaced angles, radius
/// modulated by a few low-frequency waves plus a little noise.
fn wobbly_ring(rng: &mut ChaCha8Rng, vertices: usize) -> Vec<Coord> {
    let waves: Vec<(f64, f64, f64)> = (2..6)
        .map(|k| (k as f64, rng.random_range(0.0..0.12), rng.random_range(0.0..TAU)))
        .collect();
    let step = TAU / vertices as f64;
    (0..vertices)
        .map(|i| {
            let a = (i as f64 + rng.random_range(-0.3..0.3)) * step;
            let r = 1.0
                + waves.iter().map(|&(k, amp, ph)| amp * (k * a + ph).sin()).sum::<f64>()
                + rng.random_range(-0.02..0.02);
            Coord::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Query geometries for a workload, placed uniformly inside the extent.
pub fn generate_queries(extent: &Envelope, count: usize, shape: QueryShape, seed: u64) -> Result<Vec<Geometry>> {
    let bad = |a: f64| !(a > 0.0 && a <= 1.0);
    match shape {
        QueryShape::Rect { area } | QueryShape::Polygon { area, .. } if bad(area) => {
            return Err(CliError::Usage(format!("window area {area} outside (0, 1]")));
        }
        QueryShape::Polygon { vertices, .. } if vertices < 3 => {
            return Err(CliError::Usage("a query polygon needs at least 3 vertices".into()));
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let g = match shape {
            QueryShape::Point => Geometry::point(
                rng.random_range(extent.min_x..=extent.max_x),
                rng.random_range(extent.min_y..=extent.max_y),
            ),
            QueryShape::Rect { area } => {
                let w = extent.width() * area.sqrt();
                let h = extent.height() * area.sqrt();
                let x = rng.random_range(extent.min_x..=extent.max_x - w);
                let y = rng.random_range(extent.min_y..=extent.max_y - h);
                Geometry::rect(&Envelope::new(x, y, x + w, y + h).expect("positive window"))
            }
            QueryShape::Polygon { area, vertices } => {
                let unit = wobbly_ring(&mut rng, vertices);
                let scale = (area * extent.area() / ring_area(&unit)).sqrt();
                let (mut lo, mut hi) = (Coord::new(f64::MAX, f64::MAX), Coord::new(f64::MIN, f64::MIN));
                for c in &unit {
                    lo = Coord::new(lo.x.min(c.x * scale), lo.y.min(c.y * scale));
                    hi = Coord::new(hi.x.max(c.x * scale), hi.y.max(c.y * scale));
                }
                if hi.x - lo.x > extent.width() || hi.y - lo.y > extent.height() {
                    return Err(CliError::Usage(format!("window area {area} does not fit the extent")));
                }
                let cx = rng.random_range(extent.min_x - lo.x..=extent.max_x - hi.x);
                let cy = rng.random_range(extent.min_y - lo.y..=extent.max_y - hi.y);
                let ring = unit.iter().map(|c| Coord::new(cx + c.x * scale, cy + c.y * scale)).collect();
                Geometry::Polygon(Polygon::from_exterior(ring)?)
            }
        };
        out.push(g);
    }
    Ok(out)
}

pub fn write_wkt<W: Write>(objects: &[SpatialObject], mut w: W) -> Result<()> {
    for o in objects {
        writeln!(w, "{}", o.geometry)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> Envelope {
        Envelope::new(-180.0, -90.0, 180.0, 90.0).unwrap()
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SynthSpec::new(500, KindMix::MIXED, world(), 9);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_wkt(&generate_synthetic(&spec).unwrap(), &mut a).unwrap();
        write_wkt(&generate_synthetic(&spec).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let other = SynthSpec { seed: 10, ..spec };
        let mut c = Vec::new();
        write_wkt(&generate_synthetic(&other).unwrap(), &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn linestrings_average_nineteen_segments() {
        let spec = SynthSpec::new(10_000, KindMix::LINESTRINGS, world(), 1);
        let objs = generate_synthetic(&spec).unwrap();
        let segs: usize = objs.iter().map(|o| o.geometry.num_coords() - 1).sum();
        let mean = segs as f64 / objs.len() as f64;
        assert!((mean - 19.0).abs() <= 1.9, "mean {mean}");
    }

    #[test]
    fn half_points_half_polygons() {
        let mix = KindMix { point: 0.5, linestring: 0.0, polygon: 0.5 };
        let spec = SynthSpec::new(1000, mix, world(), 3);
        let objs = generate_synthetic(&spec).unwrap();
        let points = objs.iter().filter(|o| matches!(o.geometry, Geometry::Point(_))).count();
        let mut replay = ChaCha8Rng::seed_from_u64(3);
        replay.set_stream(KIND_STREAM);
        let expected = (0..1000).filter(|_| replay.random::<f64>() < 0.5).count();
        assert_eq!(points, expected);
        assert!((points as i64 - 500).abs() < 64, "{points}");
        for o in &objs {
            o.geometry.validate().unwrap();
            assert!(world().contains_envelope(&o.geometry.envelope()));
        }
    }

    #[test]
    fn windows_have_the_requested_area() {
        let e = world();
        for q in generate_queries(&e, 50, QueryShape::Rect { area: 0.001 }, 4).unwrap() {
            let env = q.envelope();
            assert!((env.area() / e.area() - 0.001).abs() < 1e-9);
            assert!(e.contains_envelope(&env));
        }
        let points = generate_queries(&e, 5, QueryShape::Point, 4).unwrap();
        assert!(points.iter().all(|g| matches!(g, Geometry::Point(_))));
    }

    #[test]
    fn block_group_windows() {
        let e = world();
        for q in generate_queries(&e, 50, BG_WINDOW, 5).unwrap() {
            let Geometry::Polygon(p) = &q else { panic!("{q}") };
            let ring = &p.exterior()[..p.exterior().len() - 1];
            assert_eq!(ring.len(), 305);
            assert!((ring_area(ring) / e.area() - 0.001).abs() < 1e-9);
            assert!(e.contains_envelope(&q.envelope()));
            q.validate().unwrap();
        }
    }

    #[test]
    fn bad_shapes_are_usage_errors() {
        let e = world();
        for s in [
            QueryShape::Rect { area: 0.0 },
            QueryShape::Rect { area: 1.5 },
            QueryShape::Polygon { area: 0.01, vertices: 2 },
        ] {
            assert!(matches!(generate_queries(&e, 1, s, 1), Err(CliError::Usage(_))));
        }
    }
}
