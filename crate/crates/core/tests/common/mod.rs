// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::f64::consts::TAU;

use gptree::geometry::Polygon;
use gptree::{Coord, DecompositionConfig, Envelope, Geometry, GpTree, GridExtent, LookupTable, SpatialObject};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit() -> GridExtent {
    GridExtent::new(Envelope::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap()
}

pub fn config() -> DecompositionConfig {
    DecompositionConfig {
        seg: 8,
        max_level: 12,
        point_level: 12,
        fit_levels: Some(1),
    }
}

/// Star-shaped polygon: sorted angles, radii in [r/2, r].
pub fn star(rng: &mut ChaCha8Rng, c: Coord, r: f64, n: usize) -> Geometry {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let ring: Vec<Coord> = angles
        .iter()
        .map(|a| {
            let d = rng.random_range(r / 2.0..=r);
            Coord::new(
                (c.x + d * a.cos()).clamp(0.0, 1.0),
                (c.y + d * a.sin()).clamp(0.0, 1.0),
            )
        })
        .collect();
    match Polygon::from_exterior(ring) {
        Ok(p) if p.exterior().len() >= 4 => Geometry::Polygon(p),
        _ => Geometry::Point(c),
    }
}

pub fn walk(rng: &mut ChaCha8Rng, start: Coord, step: f64, segments: usize) -> Geometry {
    let mut pts = vec![start];
    let mut heading = rng.random_range(0.0..TAU);
    for _ in 0..segments {
        heading += rng.random_range(-0.8..0.8);
        let last = *pts.last().unwrap();
        let mut next = Coord::new(last.x + step * heading.cos(), last.y + step * heading.sin());
        if !(0.0..=1.0).contains(&next.x) || !(0.0..=1.0).contains(&next.y) {
            heading += std::f64::consts::PI;
            next = Coord::new(next.x.clamp(0.0, 1.0), next.y.clamp(0.0, 1.0));
        }
        if next != last {
            pts.push(next);
        }
    }
    if pts.len() < 2 {
        return Geometry::Point(start);
    }
    Geometry::line_string(pts).unwrap()
}

/// Points, random-walk linestrings and small star polygons, one third each.
pub fn mixed(n: usize, seed: u64) -> Vec<SpatialObject> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let c = Coord::new(rng.random_range(0.02..0.98), rng.random_range(0.02..0.98));
            let g = match i % 3 {
                0 => Geometry::Point(c),
                1 => {
                    let segs = rng.random_range(17..=21);
                    let step = rng.random_range(0.001..0.004);
                    walk(&mut rng, c, step, segs)
                }
                _ => {
                    let n = rng.random_range(3..12);
                    let r = rng.random_range(0.002..0.02);
                    star(&mut rng, c, r, n)
                }
            };
            SpatialObject::new(i as u64, g)
        })
        .collect()
}

pub fn query_polygon(rng: &mut ChaCha8Rng) -> Geometry {
    let c = Coord::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
    let r = rng.random_range(0.01..0.1);
    let n = rng.random_range(3..60);
    star(rng, c, r, n)
}

pub fn query_point(rng: &mut ChaCha8Rng) -> Geometry {
    Geometry::point(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))
}

pub struct Trees {
    pub basic: GpTree,
    pub optimized: GpTree,
    pub pruned: GpTree,
    pub table: LookupTable,
}

impl Trees {
    pub fn all(&self) -> [(&'static str, &GpTree); 3] {
        [
            ("basic", &self.basic),
            ("optimized", &self.optimized),
            ("pruned", &self.pruned),
        ]
    }
}

pub fn build_all(objects: &[SpatialObject], cfg: DecompositionConfig, extent: GridExtent) -> Trees {
    let (basic, table) = GpTree::build(objects, cfg, extent).unwrap();
    let mut optimized = basic.clone();
    optimized.optimize_nodes();
    let mut pruned = optimized.clone();
    pruned.prune();
    Trees {
        basic,
        optimized,
        pruned,
        table,
    }
}
