// SPDX-License-Identifier: Apache-2.0

use std::thread;
use std::time::{Duration, Instant};

use gptree::baseline::DEFAULT_NODE_CAPACITY;
use gptree::query::{eps_distance_query_with, knn_query_with, range_query_with, DEFAULT_GHSI_LEVEL};
use gptree::{
    oracle_query, str_build, Answer, DecompositionConfig, Geometry, Ghsi, GpTree, GridExtent,
    LookupTable, Predicate, QueryMode, QueryOptions, QueryStats, SpatialObject, StrTree,
};
use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Gptree,
    Str,
    Oracle,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [EngineKind::Gptree, EngineKind::Str, EngineKind::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::Gptree => "gptree",
            EngineKind::Str => "str",
            EngineKind::Oracle => "oracle",
        }
    }
}

pub fn mode_name(mode: &QueryMode) -> &'static str {
    match mode {
        QueryMode::Range(_) => "range",
        QueryMode::EpsDistance(_) => "dist",
        QueryMode::Knn(_) => "knn",
    }
}

fn mode_param(mode: &QueryMode) -> f64 {
    match *mode {
        QueryMode::Range(Predicate::Intersects) => 0.0,
        QueryMode::Range(Predicate::Contains) => 1.0,
        QueryMode::EpsDistance(e) => e,
        QueryMode::Knn(k) => k as f64,
    }
}

#[derive(Debug, Clone)]
pub struct Workload {
    pub mode: QueryMode,
    pub engines: Vec<EngineKind>,
    pub workers: usize,
    pub config: DecompositionConfig,
    pub extent: GridExtent,
    pub ghsi_level: u8,
    pub str_capacity: usize,
    /// Queries run once before timing starts.
    pub warmup: usize,
    pub options: QueryOptions,
}

impl Workload {
    pub fn new(mode: QueryMode, extent: GridExtent) -> Self {
        Self {
            mode,
            engines: EngineKind::ALL.to_vec(),
            workers: 1,
            config: DecompositionConfig::default(),
            extent,
            ghsi_level: DEFAULT_GHSI_LEVEL,
            str_capacity: DEFAULT_NODE_CAPACITY,
            warmup: 10,
            options: QueryOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        self.config.validate()?;
        if self.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// A built engine, ready to answer queries.
pub enum Engine<'a> {
    Gptree {
        tree: GpTree,
        table: LookupTable,
        ghsi: Option<Ghsi>,
    },
    Str(StrTree),
    Oracle(&'a [SpatialObject]),
}

impl<'a> Engine<'a> {
    pub fn build(kind: EngineKind, objects: &'a [SpatialObject], w: &Workload) -> Result<Self> {
        Ok(match kind {
            EngineKind::Gptree => {
                let (tree, table) = GpTree::build_optimized(objects, w.config, w.extent)?;
                let ghsi = match w.mode {
                    QueryMode::Knn(_) => Some(Ghsi::from_table(&table, w.ghsi_level, w.extent)?),
                    _ => None,
                };
                Engine::Gptree { tree, table, ghsi }
            }
            EngineKind::Str => Engine::Str(str_build(objects, w.str_capacity)?),
            EngineKind::Oracle => Engine::Oracle(objects),
        })
    }

    pub fn query(
        &self,
        q: &Geometry,
        mode: QueryMode,
        opts: &QueryOptions,
        stats: &mut QueryStats,
    ) -> Result<Answer> {
        Ok(match self {
            Engine::Gptree { tree, table, ghsi } => match mode {
                QueryMode::Range(theta) => {
                    Answer::Ids(range_query_with(tree, table, q, theta, opts, stats)?)
                }
                QueryMode::EpsDistance(eps) => {
                    Answer::Ids(eps_distance_query_with(tree, table, q, eps, opts, stats)?)
                }
                QueryMode::Knn(k) => {
                    let ghsi = ghsi.as_ref().ok_or_else(|| {
                        CliError::Usage("kNN needs an engine built with a histogram".into())
                    })?;
                    Answer::Ranked(knn_query_with(tree, table, ghsi, q, k, opts, stats)?)
                }
            },
            Engine::Str(t) => t.query_with(q, mode, stats)?,
            Engine::Oracle(objects) => {
                let t0 = Instant::now();
                let a = oracle_query(objects, q, mode)?;
                stats.queries += 1;
                stats.candidates += objects.len() as u64;
                stats.refined_accepted += a.len() as u64;
                stats.refined_rejected += (objects.len() - a.len()) as u64;
                stats.refine_time += t0.elapsed();
                a
            }
        })
    }

    fn fill_memory(&self, r: &mut MetricsReport) {
        match self {
            Engine::Gptree { tree, table, ghsi } => {
                let s = tree.stats();
                r.index_bytes = s.memory_bytes;
                r.table_bytes = table.memory_bytes();
                r.ghsi_bytes = ghsi.as_ref().map_or(0, Ghsi::table_bytes);
                r.indexed_cells = table.cell_count() as u64;
                r.tree_height = s.height;
                r.tree_nodes = s.node_count;
                r.nc_definition = "cell-candidates".into();
            }
            Engine::Str(t) => {
                r.index_bytes = t.memory_bytes();
                r.tree_height = t.height();
                r.tree_nodes = t.nodes().len() as u64;
                r.nc_definition = "mbr-candidates".into();
            }
            Engine::Oracle(_) => r.nc_definition = "scanned-objects".into(),
        }
        r.memory_bytes = r.index_bytes + r.table_bytes + r.ghsi_bytes;
    }
}

pub struct Run {
    pub answers: Vec<Answer>,
    pub stats: QueryStats,
    pub wall: Duration,
}

type WorkerOutput = Result<(Vec<(usize, Answer)>, QueryStats)>;

/// Answers every query, splitting them round-robin over `workers` threads.
pub fn execute(engine: &Engine, queries: &[Geometry], w: &Workload) -> Result<Run> {
    let workers = w.workers.clamp(1, queries.len().max(1));
    let start = Instant::now();
    let parts: Vec<WorkerOutput> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                s.spawn(move || {
                    let mut stats = QueryStats::default();
                    let mut out = Vec::new();
                    for idx in (i..queries.len()).step_by(workers) {
                        out.push((idx, engine.query(&queries[idx], w.mode, &w.options, &mut stats)?));
                    }
                    Ok((out, stats))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let wall = start.elapsed();
    let mut answers: Vec<Option<Answer>> = vec![None; queries.len()];
    let mut stats = QueryStats::default();
    for part in parts {
        let (out, s) = part?;
        stats += &s;
        for (idx, a) in out {
            answers[idx] = Some(a);
        }
    }
    Ok(Run {
        answers: answers.into_iter().map(|a| a.expect("every query answered")).collect(),
        stats,
        wall,
    })
}

/// Same result under the query semantics: equal id sets, or equal distance
/// sequences for kNN.
pub fn answers_agree(a: &Answer, b: &Answer) -> bool {
    match (a, b) {
        (Answer::Ranked(x), Answer::Ranked(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.distance == q.distance)
        }
        _ => a.ids() == b.ids(),
    }
}

/// Builds and times every engine of the workload, checks each answer
/// against the exhaustive scan, and reports per-engine metrics.
pub fn run_benchmark(
    w: &Workload,
    objects: &[SpatialObject],
    queries: &[Geometry],
) -> Result<Vec<MetricsReport>> {
    w.validate()?;
    let oracle = Engine::Oracle(objects);
    let truth = execute(&oracle, queries, w)?;
    let mut reports = Vec::new();
    for &kind in &w.engines {
        let t0 = Instant::now();
        let engine = Engine::build(kind, objects, w)?;
        let build = t0.elapsed();
        info!("{} built in {:.1} ms", kind.name(), build.as_secs_f64() * 1e3);
        let warm = &queries[..w.warmup.min(queries.len())];
        execute(&engine, warm, w)?;
        let run = execute(&engine, queries, w)?;
        if let Some(query_id) = (0..queries.len()).find(|&i| !answers_agree(&run.answers[i], &truth.answers[i])) {
            return Err(CliError::Divergence {
                engine: kind.name().into(),
                query_id,
            });
        }
        let mut r = MetricsReport::new(kind.name(), mode_name(&w.mode), mode_param(&w.mode));
        r.seg = w.config.seg;
        r.objects = objects.len() as u64;
        r.workers = w.workers as u32;
        r.build_millis = build.as_secs_f64() * 1e3;
        r.apply_stats(&run.stats);
        r.set_wall(queries.len() as u64, run.wall.as_secs_f64() * 1e6);
        engine.fill_memory(&mut r);
        info!(
            "{}: {:.0} queries/min, thr {:.3} fhr {:.3} ucr {:.3}",
            r.engine, r.throughput_per_minute, r.thr, r.fhr, r.ucr
        );
        reports.push(r);
    }
    Ok(reports)
}

/// Runs the gptree engine once per SEG value; reports come back in SEG order.
pub fn seg_sweep(
    w: &Workload,
    segs: &[u32],
    objects: &[SpatialObject],
    queries: &[Geometry],
) -> Result<Vec<MetricsReport>> {
    let mut segs = segs.to_vec();
    segs.sort_unstable();
    let mut out = Vec::new();
    for seg in segs {
        let mut wl = w.clone();
        wl.config.seg = seg;
        wl.engines = vec![EngineKind::Gptree];
        out.extend(run_benchmark(&wl, objects, queries)?);
    }
    Ok(out)
}
