// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use gptree::{parse_wkt, ObjectId, SpatialObject};
use log::warn;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One WKT geometry per line; ids are line order among valid lines.
    WktLines,
    /// CSV with an `id,wkt` header.
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::WktLines,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub objects: Vec<SpatialObject>,
    pub errors: Vec<LineError>,
}

#[derive(Deserialize)]
struct Row {
    id: ObjectId,
    wkt: String,
}

const MAX_INVALID: f64 = 0.10;

pub fn ingest(path: &Path, format: InputFormat) -> Result<Ingested> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let mut objects = Vec::new();
    let mut errors = Vec::new();
    let mut total = 0usize;
    let mut record = |line: usize, parsed: Result<SpatialObject, String>| {
        total += 1;
        match parsed.and_then(|o| o.geometry.validate().map(|_| o).map_err(|e| e.to_string())) {
            Ok(o) => objects.push(o),
            Err(message) => {
                warn!("{}:{line}: {message}", path.display());
                errors.push(LineError { line, message });
            }
        }
    };
    match format {
        InputFormat::WktLines => {
            let mut next_id: ObjectId = 0;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                let text = line.trim();
                if text.is_empty() {
                    continue;
                }
                let parsed = parse_wkt(text).map_err(|e| e.to_string()).map(|g| {
                    next_id += 1;
                    SpatialObject::new(next_id - 1, g)
                });
                record(i + 1, parsed);
            }
        }
        InputFormat::Csv => {
            let mut reader = csv::Reader::from_reader(file);
            for (i, row) in reader.deserialize::<Row>().enumerate() {
                let parsed = row.map_err(|e| e.to_string()).and_then(|r| {
                    parse_wkt(&r.wkt)
                        .map(|g| SpatialObject::new(r.id, g))
                        .map_err(|e| e.to_string())
                });
                record(i + 2, parsed);
            }
        }
    }
    if total > 0 && errors.len() as f64 > MAX_INVALID * total as f64 {
        return Err(CliError::TooManyInvalid {
            path: path.to_owned(),
            invalid: errors.len(),
            total,
        });
    }
    let mut ids: Vec<ObjectId> = objects.iter().map(|o| o.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Data(format!("duplicate id {} in {}", w[0], path.display())));
    }
    Ok(Ingested { objects, errors })
}

/// Reads query geometries, one WKT per line.
pub fn read_queries(path: &Path) -> Result<Vec<gptree::Geometry>> {
    Ok(ingest(path, InputFormat::WktLines)?
        .objects
        .into_iter()
        .map(|o| o.geometry)
        .collect())
}
