// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use gptree::{ObjectId, QueryStats};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One row per engine and parameter point. The `n_c` columns count
/// cell-overlap candidates for gptree, envelope hits for str and scanned
/// objects for oracle; `nc_definition` names which.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub engine: String,
    pub query_type: String,
    pub param: f64,
    pub seg: u32,
    pub objects: u64,
    pub queries: u64,
    pub workers: u32,
    pub build_millis: f64,
    pub wall_micros: f64,
    pub throughput_per_minute: f64,
    pub mean_latency_micros: f64,
    pub filter_micros: f64,
    pub refine_micros: f64,
    pub total_micros: f64,
    pub n_t: u64,
    pub n_f: u64,
    pub n_u: u64,
    pub n_c: u64,
    pub thr: f64,
    pub fhr: f64,
    pub ucr: f64,
    pub nc_definition: String,
    pub index_bytes: u64,
    pub table_bytes: u64,
    pub ghsi_bytes: u64,
    pub memory_bytes: u64,
    pub indexed_cells: u64,
    pub tree_height: u32,
    pub tree_nodes: u64,
    pub max_descent: u64,
    pub descent_violations: u64,
    pub knn_step3_cells: u64,
    pub knn_early_exits: u64,
}

impl MetricsReport {
    pub fn new(engine: &str, query_type: &str, param: f64) -> Self {
        Self {
            engine: engine.into(),
            query_type: query_type.into(),
            param,
            seg: 0,
            objects: 0,
            queries: 0,
            workers: 1,
            build_millis: 0.0,
            wall_micros: 0.0,
            throughput_per_minute: 0.0,
            mean_latency_micros: 0.0,
            filter_micros: 0.0,
            refine_micros: 0.0,
            total_micros: 0.0,
            n_t: 0,
            n_f: 0,
            n_u: 0,
            n_c: 0,
            thr: 0.0,
            fhr: 0.0,
            ucr: 0.0,
            nc_definition: String::new(),
            index_bytes: 0,
            table_bytes: 0,
            ghsi_bytes: 0,
            memory_bytes: 0,
            indexed_cells: 0,
            tree_height: 0,
            tree_nodes: 0,
            max_descent: 0,
            descent_violations: 0,
            knn_step3_cells: 0,
            knn_early_exits: 0,
        }
    }

    /// Fills counters and rates from merged query statistics.
    pub fn apply_stats(&mut self, s: &QueryStats) {
        self.n_t = s.true_hits;
        self.n_u = s.refined_accepted;
        self.n_f = s.refined_rejected;
        self.n_c = self.n_t + self.n_u + self.n_f;
        if self.n_c > 0 {
            let c = self.n_c as f64;
            self.thr = self.n_t as f64 / c;
            self.fhr = self.n_f as f64 / c;
            self.ucr = self.n_u as f64 / c;
        }
        self.filter_micros = s.filter_time.as_secs_f64() * 1e6;
        self.refine_micros = s.refine_time.as_secs_f64() * 1e6;
        self.total_micros = self.filter_micros + self.refine_micros;
        self.max_descent = s.max_descent;
        self.descent_violations = s.descent_violations;
        self.knn_step3_cells = s.knn_step3_cells;
        self.knn_early_exits = s.knn_early_exits;
    }

    pub fn set_wall(&mut self, queries: u64, wall_micros: f64) {
        self.queries = queries;
        self.wall_micros = wall_micros;
        if wall_micros > 0.0 {
            self.throughput_per_minute = queries as f64 / (wall_micros / 60e6);
        }
        if queries > 0 {
            self.mean_latency_micros = wall_micros * self.workers as f64 / queries as f64;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

pub fn write_reports<W: Write>(reports: &[MetricsReport], format: ExportFormat, w: W) -> Result<()> {
    match format {
        ExportFormat::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, reports)?;
            writeln!(w)?;
            w.flush()?;
        }
        ExportFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in reports {
                out.serialize(r)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn export(reports: &[MetricsReport], format: ExportFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    write_reports(reports, format, BufWriter::new(file))
}

pub fn read_reports_csv<R: Read>(r: R) -> Result<Vec<MetricsReport>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

/// One query answer as printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultLine {
    pub query_id: usize,
    #[serde(rename = "type")]
    pub query_type: String,
    pub elapsed_micros: u128,
    pub result_ids: Vec<ObjectId>,
    pub engine: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateLine>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateLine {
    pub s_id: ObjectId,
    pub hit_tag: gptree::query::HitTag,
    pub overlap_cell_count: usize,
}
