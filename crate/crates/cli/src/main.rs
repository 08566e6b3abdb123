// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gptree::query::{filter, FilterMode, QueryPlan};
use gptree::{
    DecompositionConfig, Envelope, Geometry, GpTree, GridExtent, Predicate, QueryMode,
    QueryStats,
};
use gptree_cli::report::CandidateLine;
use gptree_cli::{
    export, generate_queries, generate_synthetic, ingest, read_queries, run_benchmark, seg_sweep,
    write_reports, write_wkt, CliError, Engine, EngineKind, ExportFormat, InputFormat, KindMix,
    QueryShape, Result, ResultLine, SynthSpec, Workload,
};
use log::info;

#[derive(Parser)]
#[command(name = "gptree", version, about = "Spatial index over grid-decomposed geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as WKT lines.
    Gen(GenArgs),
    /// Generate query geometries as WKT lines.
    GenQueries(GenQueriesArgs),
    /// Build an index and save it.
    Build(BuildArgs),
    /// Answer queries and print one JSON result per line.
    Query(QueryArgs),
    /// Time engines on a workload and export metrics.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mix {
    Points,
    Linestrings,
    Mixed,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum QueryKind {
    Range,
    Dist,
    Knn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theta {
    Intersects,
    Contains,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EngineArg {
    Gptree,
    Str,
    Oracle,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value = "mixed")]
    mix: Mix,
    #[arg(long, value_parser = parse_extent)]
    extent: Option<Envelope>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenQueriesArgs {
    #[arg(long)]
    count: usize,
    /// Window area as a fraction of the extent; points when absent.
    #[arg(long)]
    window: Option<f64>,
    /// Vertices of polygon windows; rectangles when absent.
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long, value_parser = parse_extent)]
    extent: Option<Envelope>,
    #[arg(long, default_value_t = 2)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct IndexArgs {
    #[arg(long)]
    max_level: Option<u8>,
    #[arg(long)]
    point_level: Option<u8>,
    /// Levels below the envelope fit level that objects are always split to.
    #[arg(long)]
    fit_levels: Option<u8>,
    #[arg(long, value_parser = parse_extent)]
    extent: Option<Envelope>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 20)]
    seg: u32,
    #[command(flatten)]
    index: IndexArgs,
    /// Snapshot file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryParams {
    #[arg(long = "type", value_enum, default_value = "range")]
    kind: QueryKind,
    #[arg(long, value_enum, default_value = "intersects")]
    theta: Theta,
    #[arg(long, default_value_t = 0.03)]
    eps: f64,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = gptree::query::DEFAULT_GHSI_LEVEL)]
    ghsi_level: u8,
    /// Extra rasterization levels for query geometries.
    #[arg(long, default_value_t = gptree::query::DEFAULT_QUERY_FIT_LEVELS)]
    query_fit_levels: u8,
}

impl QueryParams {
    fn mode(&self) -> QueryMode {
        match self.kind {
            QueryKind::Range => QueryMode::Range(match self.theta {
                Theta::Intersects => Predicate::Intersects,
                Theta::Contains => Predicate::Contains,
            }),
            QueryKind::Dist => QueryMode::EpsDistance(self.eps),
            QueryKind::Knn => QueryMode::Knn(self.k),
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Dataset to index; ignored for gptree when --index is given.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Snapshot written by `build`.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    params: QueryParams,
    #[arg(long, default_value_t = 20)]
    seg: u32,
    #[command(flatten)]
    index_args: IndexArgs,
    #[arg(long, value_enum, default_value = "gptree")]
    engine: EngineArg,
    /// Include filter candidates for gptree range queries.
    #[arg(long)]
    candidates: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    params: QueryParams,
    /// One or more SEG values; several values run a gptree sweep.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    seg: Vec<u32>,
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long, value_enum, default_value = "all")]
    engine: EngineArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_extent(s: &str) -> std::result::Result<Envelope, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] => Envelope::new(a, b, c, d).map_err(|e| e.to_string()),
        _ => Err("expected min_x,min_y,max_x,max_y".into()),
    }
}

fn grid_extent(e: Option<Envelope>) -> Result<GridExtent> {
    Ok(match e {
        Some(e) => GridExtent::new(e)?,
        None => GridExtent::default(),
    })
}

fn config(seg: u32, a: &IndexArgs) -> DecompositionConfig {
    let mut c = DecompositionConfig { seg, ..Default::default() };
    if let Some(l) = a.max_level {
        c.max_level = l;
    }
    if let Some(l) = a.point_level {
        c.point_level = l;
    }
    if a.fit_levels.is_some() {
        c.fit_levels = a.fit_levels;
    }
    c
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_data(path: &Path) -> Result<Vec<gptree::SpatialObject>> {
    let data = ingest(path, InputFormat::from_path(path))?;
    info!("loaded {} objects, skipped {}", data.objects.len(), data.errors.len());
    Ok(data.objects)
}

fn engines(e: EngineArg) -> Vec<EngineKind> {
    match e {
        EngineArg::Gptree => vec![EngineKind::Gptree],
        EngineArg::Str => vec![EngineKind::Str],
        EngineArg::Oracle => vec![EngineKind::Oracle],
        EngineArg::All => EngineKind::ALL.to_vec(),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mix = match a.mix {
        Mix::Points => KindMix::POINTS,
        Mix::Linestrings => KindMix::LINESTRINGS,
        Mix::Mixed => KindMix::MIXED,
    };
    let extent = a.extent.unwrap_or(*GridExtent::default().bounds());
    let objects = generate_synthetic(&SynthSpec::new(a.count, mix, extent, a.seed))?;
    write_wkt(&objects, output(&a.out)?)
}

fn gen_queries(a: GenQueriesArgs) -> Result<()> {
    let shape = match (a.window, a.vertices) {
        (None, None) => QueryShape::Point,
        (None, Some(_)) => return Err(CliError::Usage("--vertices needs --window".into())),
        (Some(area), None) => QueryShape::Rect { area },
        (Some(area), Some(vertices)) => QueryShape::Polygon { area, vertices },
    };
    let extent = a.extent.unwrap_or(*GridExtent::default().bounds());
    let queries = generate_queries(&extent, a.count, shape, a.seed)?;
    let mut out = output(&a.out)?;
    for g in queries {
        writeln!(out, "{g}")?;
    }
    out.flush()?;
    Ok(())
}

fn build(a: BuildArgs) -> Result<()> {
    let objects = load_data(&a.data)?;
    let cfg = config(a.seg, &a.index);
    let t0 = Instant::now();
    let (tree, table) = GpTree::build_optimized(&objects, cfg, grid_extent(a.index.extent)?)?;
    info!("built in {:.1} ms", t0.elapsed().as_secs_f64() * 1e3);
    tree.save(&table, &a.out)?;
    let mut w = BufWriter::new(io::stdout().lock());
    serde_json::to_writer(&mut w, &tree.stats())?;
    writeln!(w)?;
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    let mode = a.params.mode();
    mode.validate()?;
    let queries = read_queries(&a.queries)?;
    let kind = match a.engine {
        EngineArg::All => return Err(CliError::Usage("query takes a single engine".into())),
        e => engines(e)[0],
    };
    let extent = grid_extent(a.index_args.extent)?;
    let mut w = Workload::new(mode, extent);
    w.config = config(a.seg, &a.index_args);
    w.ghsi_level = a.params.ghsi_level;
    w.options.query_fit_levels = a.params.query_fit_levels;
    let objects = match &a.data {
        Some(p) => load_data(p)?,
        None => Vec::new(),
    };
    let engine = match (&a.index, kind) {
        (Some(p), EngineKind::Gptree) => {
            let (tree, table) = GpTree::load(p)?;
            let ghsi = match mode {
                QueryMode::Knn(_) => Some(gptree::Ghsi::from_table(&table, w.ghsi_level, *tree.extent())?),
                _ => None,
            };
            Engine::Gptree { tree, table, ghsi }
        }
        _ if a.data.is_none() => return Err(CliError::Usage("--data or --index is required".into())),
        _ => Engine::build(kind, &objects, &w)?,
    };
    let mut out = output(&a.out)?;
    for (i, q) in queries.iter().enumerate() {
        let mut stats = QueryStats::default();
        let t0 = Instant::now();
        let ans = engine.query(q, mode, &w.options, &mut stats)?;
        let elapsed = t0.elapsed().as_micros();
        let candidates = match (&engine, mode, a.candidates) {
            (Engine::Gptree { tree, .. }, QueryMode::Range(theta), true) => {
                Some(candidate_lines(tree, q, theta, &w)?)
            }
            _ => None,
        };
        let line = ResultLine {
            query_id: i,
            query_type: gptree_cli::runner::mode_name(&mode).into(),
            elapsed_micros: elapsed,
            result_ids: ans.ids(),
            engine: kind.name().into(),
            distances: match &ans {
                gptree::Answer::Ranked(r) => Some(r.iter().map(|n| n.distance).collect()),
                _ => None,
            },
            candidates,
        };
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn candidate_lines(tree: &GpTree, q: &Geometry, theta: Predicate, w: &Workload) -> Result<Vec<CandidateLine>> {
    let plan = QueryPlan::new(q, tree)?;
    let cands = filter(
        tree,
        &plan.cells,
        FilterMode::Range(theta),
        w.options.true_hit_rule,
        &mut QueryStats::default(),
    );
    Ok(cands
        .into_iter()
        .map(|c| CandidateLine {
            s_id: c.s_id,
            hit_tag: c.hit_tag,
            overlap_cell_count: c.overlaps.len(),
        })
        .collect())
}

fn bench(a: BenchArgs) -> Result<()> {
    let objects = load_data(&a.data)?;
    let queries = read_queries(&a.queries)?;
    let mut w = Workload::new(a.params.mode(), grid_extent(a.index.extent)?);
    w.engines = engines(a.engine);
    w.workers = a.workers;
    w.warmup = a.warmup;
    w.ghsi_level = a.params.ghsi_level;
    w.options.query_fit_levels = a.params.query_fit_levels;
    w.config = config(a.seg[0], &a.index);
    let reports = if a.seg.len() > 1 {
        if a.engine != EngineArg::Gptree && a.engine != EngineArg::All {
            return Err(CliError::Usage("a SEG sweep runs the gptree engine".into()));
        }
        seg_sweep(&w, &a.seg, &objects, &queries)?
    } else {
        run_benchmark(&w, &objects, &queries)?
    };
    let format = match a.format {
        Format::Json => ExportFormat::Json,
        Format::Csv => ExportFormat::Csv,
    };
    match &a.out {
        Some(p) => export(&reports, format, p),
        None => write_reports(&reports, format, io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GPTREE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = match cli.command {
        Command::Gen(a) => gen(a),
        Command::GenQueries(a) => gen_queries(a),
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Bench(a) => bench(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
