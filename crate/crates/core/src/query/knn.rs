// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;

use super::{filter, FilterMode, Ghsi, QueryOptions, QueryStats};
use crate::error::{Error, Result};
use crate::geometry::{distance, Coord, Envelope, Geometry, ObjectId, EPS};
use crate::grid::{CellCode, GridCell, GridExtent};
use crate::tree::{GpTree, LookupTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: ObjectId,
    pub distance: f64,
}

/// Inclusive column/row rectangle of cells at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    level: u8,
    cols: (u32, u32),
    rows: (u32, u32),
}

impl Block {
    fn side(&self) -> u32 {
        ((1u64 << self.level) - 1) as u32
    }

    fn area(&self) -> u64 {
        (self.cols.1 - self.cols.0 + 1) as u64 * (self.rows.1 - self.rows.0 + 1) as u64
    }

    fn has(&self, c: u32, r: u32) -> bool {
        (self.cols.0..=self.cols.1).contains(&c) && (self.rows.0..=self.rows.1).contains(&r)
    }

    fn is_full(&self) -> bool {
        let n = self.side();
        self.cols == (0, n) && self.rows == (0, n)
    }

    fn grow(&self) -> Block {
        let n = self.side();
        Block {
            level: self.level,
            cols: (self.cols.0.saturating_sub(1), (self.cols.1 + 1).min(n)),
            rows: (self.rows.0.saturating_sub(1), (self.rows.1 + 1).min(n)),
        }
    }

    fn cells(&self) -> impl Iterator<Item = CellCode> + '_ {
        (self.cols.0..=self.cols.1).flat_map(move |c| {
            (self.rows.0..=self.rows.1)
                .map(move |r| CellCode::encode(c, r, self.level).expect("block inside grid"))
        })
    }

    /// Column and row ranges at this block's level spanned by `cell`.
    fn span(&self, cell: &CellCode) -> ((u32, u32), (u32, u32)) {
        let (c, r, l) = cell.decode();
        let shift = self.level - l;
        let lo = |v: u32| v << shift;
        let hi = |v: u32| ((v + 1) << shift) - 1;
        ((lo(c), hi(c)), (lo(r), hi(r)))
    }

    fn covers(&self, cell: &CellCode) -> bool {
        let (c, r) = self.span(cell);
        c.0 >= self.cols.0 && c.1 <= self.cols.1 && r.0 >= self.rows.0 && r.1 <= self.rows.1
    }

    fn meets(&self, cell: &CellCode) -> bool {
        let (c, r) = self.span(cell);
        c.0 <= self.cols.1 && c.1 >= self.cols.0 && r.0 <= self.rows.1 && r.1 >= self.rows.0
    }

    /// The block as a minimal set of aligned quadtree cells.
    fn aligned(&self) -> Vec<CellCode> {
        let mut out = Vec::new();
        let mut stack = vec![CellCode::ROOT];
        while let Some(cell) = stack.pop() {
            if self.covers(&cell) {
                out.push(cell);
            } else if self.meets(&cell) {
                stack.extend(cell.children().expect("above block level"));
            }
        }
        out
    }

    fn bounds(&self, extent: &GridExtent) -> Envelope {
        let lo = extent.cell_bounds(CellCode::encode(self.cols.0, self.rows.0, self.level).unwrap());
        let hi = extent.cell_bounds(CellCode::encode(self.cols.1, self.rows.1, self.level).unwrap());
        lo.merge(&hi)
    }

    /// Distance from `c` to the nearest block side that is not on the grid
    /// border; infinite when the block is the whole grid.
    fn inner_margin(&self, c: &Coord, extent: &GridExtent) -> f64 {
        let b = self.bounds(extent);
        let n = self.side();
        let mut d = f64::INFINITY;
        if self.cols.0 > 0 {
            d = d.min(c.x - b.min_x);
        }
        if self.cols.1 < n {
            d = d.min(b.max_x - c.x);
        }
        if self.rows.0 > 0 {
            d = d.min(c.y - b.min_y);
        }
        if self.rows.1 < n {
            d = d.min(b.max_y - c.y);
        }
        d.max(0.0)
    }
}

/// Objects counted in the cells of `outer` that are not in `inner`.
fn ring_count(ghsi: &Ghsi, inner: &Block, outer: &Block) -> u64 {
    let ring = outer.area() - inner.area();
    if ring > ghsi.occupied() as u64 {
        return ghsi
            .iter()
            .filter(|(c, _)| {
                let (x, y, _) = c.decode();
                outer.has(x, y) && !inner.has(x, y)
            })
            .map(|(_, n)| n as u64)
            .sum();
    }
    let at = |c: u32, r: u32| ghsi.count(&CellCode::encode(c, r, outer.level).expect("block inside grid")) as u64;
    let mut n = 0;
    for r in outer.rows.0..=outer.rows.1 {
        if r < inner.rows.0 || r > inner.rows.1 {
            n += (outer.cols.0..=outer.cols.1).map(|c| at(c, r)).sum::<u64>();
        } else {
            n += (outer.cols.0..inner.cols.0).map(|c| at(c, r)).sum::<u64>();
            n += (inner.cols.1 + 1..=outer.cols.1).map(|c| at(c, r)).sum::<u64>();
        }
    }
    n
}

/// Adds the ring of neighbouring cells around `current`.
pub fn extend_query_cells(current: &[CellCode]) -> Vec<CellCode> {
    let mut set: HashSet<CellCode> = current.iter().copied().collect();
    for c in current {
        set.extend(c.neighbors());
    }
    let mut out: Vec<CellCode> = set.into_iter().collect();
    out.sort_by_key(|c| c.bits());
    out
}

fn disc_cells(
    center: &Coord,
    radius: f64,
    level: u8,
    extent: &GridExtent,
    skip: impl Fn(&CellCode) -> bool,
    coarse: bool,
) -> Vec<CellCode> {
    let mut out = Vec::new();
    let mut stack = vec![CellCode::ROOT];
    while let Some(cell) = stack.pop() {
        let r = extent.cell_bounds(cell);
        if r.distance_to_coord(center) > radius + EPS || skip(&cell) {
            continue;
        }
        if cell.level() == level || (coarse && r.max_distance_to_coord(center) <= radius) {
            out.push(cell);
        } else {
            stack.extend(cell.children().expect("above target level"));
        }
    }
    out
}

/// Level cells of the histogram meeting the closed disc around `center`
/// that are not in `viewed`.
pub fn unviewed_cells(
    center: &Coord,
    radius: f64,
    viewed: &HashSet<CellCode>,
    ghsi: &Ghsi,
) -> Vec<CellCode> {
    let level = ghsi.level();
    let mut out = disc_cells(center, radius, level, ghsi.extent(), |_| false, false);
    out.retain(|c| !viewed.contains(c));
    out.sort_by_key(|c| c.bits());
    out
}

pub fn knn_query(
    tree: &GpTree,
    table: &LookupTable,
    ghsi: &Ghsi,
    q: &Geometry,
    k: usize,
) -> Result<Vec<Neighbor>> {
    knn_query_with(tree, table, ghsi, q, k, &QueryOptions::default(), &mut QueryStats::default())
}

struct Ranking<'a> {
    table: &'a LookupTable,
    q: &'a Geometry,
    dist: HashMap<ObjectId, f64>,
}

impl Ranking<'_> {
    fn add(
        &mut self,
        tree: &GpTree,
        cells: &[CellCode],
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<()> {
        let cells: Vec<GridCell> = cells.iter().map(|&c| GridCell::boundary(c)).collect();
        for cand in filter(tree, &cells, FilterMode::Collect, opts.true_hit_rule, stats) {
            if self.dist.contains_key(&cand.s_id) {
                continue;
            }
            let e = self.table.get(cand.s_id).ok_or(Error::MissingObject(cand.s_id))?;
            self.dist.insert(cand.s_id, distance(self.q, &e.geometry));
        }
        Ok(())
    }

    fn top(&self, k: usize) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = self
            .dist
            .iter()
            .map(|(&id, &distance)| Neighbor { id, distance })
            .collect();
        all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
        all.truncate(k);
        all
    }
}

/// The `k` objects nearest to `q`, ordered by (distance, id).
pub fn knn_query_with(
    tree: &GpTree,
    table: &LookupTable,
    ghsi: &Ghsi,
    q: &Geometry,
    k: usize,
    opts: &QueryOptions,
    stats: &mut QueryStats,
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    q.validate()?;
    let extent = ghsi.extent();
    let env = q.envelope();
    if !extent.bounds().contains_envelope(&env) {
        return Err(Error::OutsideExtent {
            geometry: env,
            extent: *extent.bounds(),
        });
    }
    let t0 = Instant::now();
    let level = ghsi.level();
    let (cols, rows) = extent.index_range(&env, level);
    let mut block = Block { level, cols, rows };
    let mut count: u64 = block.cells().map(|c| ghsi.count(&c) as u64).sum();
    while !block.is_full() {
        let next = block.grow();
        stats.knn_extension_rounds += 1;
        if count >= k as u64 {
            block = next;
            break;
        }
        count += ring_count(ghsi, &block, &next);
        block = next;
    }

    let mut ranking = Ranking {
        table,
        q,
        dist: HashMap::new(),
    };
    ranking.add(tree, &block.aligned(), opts, stats)?;
    let t1 = Instant::now();

    let center = q.centroid();
    let spread = q.max_distance_from(&center);
    let mut top = ranking.top(k);
    let d_k = if top.len() == k {
        top[k - 1].distance
    } else {
        f64::INFINITY
    };
    let d_m = block.inner_margin(&center, extent);
    let mut t2 = Instant::now();
    if d_k + spread < d_m {
        stats.knn_early_exits += 1;
    } else {
        let radius = d_k + spread;
        let cells = disc_cells(&center, radius, level, extent, |c| block.covers(c), true);
        stats.knn_step3_cells += cells
            .iter()
            .map(|c| 1u64 << (2 * (level - c.level()) as u32))
            .sum::<u64>();
        t2 = Instant::now();
        ranking.add(tree, &cells, opts, stats)?;
        top = ranking.top(k);
    }
    stats.queries += 1;
    stats.refined_accepted += top.len() as u64;
    stats.refined_rejected += (ranking.dist.len() - top.len()) as u64;
    stats.filter_time += (t1 - t0) + t2.elapsed();
    stats.refine_time += t2 - t1;
    Ok(top)
}
