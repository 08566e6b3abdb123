// SPDX-License-Identifier: Apache-2.0

//! Dataset ingestion, synthetic workloads and the benchmark runner behind
//! the `gptree` command.

pub mod error;
pub mod ingest;
pub mod report;
pub mod runner;
pub mod synth;

pub use error::{CliError, Result};
pub use ingest::{ingest, read_queries, InputFormat};
pub use report::{export, read_reports_csv, write_reports, ExportFormat, MetricsReport, ResultLine};
pub use runner::{answers_agree, execute, run_benchmark, seg_sweep, Engine, EngineKind, Workload};
pub use synth::{generate_queries, generate_synthetic, write_wkt, KindMix, QueryShape, SynthSpec, BG_WINDOW};
