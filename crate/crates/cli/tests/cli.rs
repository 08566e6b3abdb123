// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use gptree_cli::read_reports_csv;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gptree")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn fixture(dir: &TempDir) -> (String, String) {
    let data = p(dir, "data.wkt");
    let queries = p(dir, "q.wkt");
    ok(&["gen", "--count", "400", "--mix", "mixed", "--seed", "3", "--out", &data]);
    ok(&["gen-queries", "--count", "20", "--window", "0.01", "--vertices", "16", "--out", &queries]);
    (data, queries)
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = ok(&["gen", "--count", "50", "--seed", "9"]);
    let b = ok(&["gen", "--count", "50", "--seed", "9"]);
    let c = ok(&["gen", "--count", "50", "--seed", "10"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 50);
}

#[test]
fn query_engines_agree() {
    let dir = TempDir::new().unwrap();
    let (data, queries) = fixture(&dir);
    let ids = |engine: &str, kind: &str| -> Vec<Vec<u64>> {
        ok(&["query", "--data", &data, "--queries", &queries, "--engine", engine, "--type", kind])
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                serde_json::from_value(v["resultIds"].clone()).unwrap()
            })
            .collect()
    };
    for kind in ["range", "dist"] {
        let want = ids("oracle", kind);
        assert_eq!(want.len(), 20);
        assert_eq!(ids("gptree", kind), want, "{kind}");
        assert_eq!(ids("str", kind), want, "{kind}");
    }
}

#[test]
fn snapshot_answers_like_a_fresh_build() {
    let dir = TempDir::new().unwrap();
    let (data, queries) = fixture(&dir);
    let snap = p(&dir, "index.snap");
    let stats = ok(&["build", "--data", &data, "--out", &snap]);
    let v: serde_json::Value = serde_json::from_str(stats.trim()).unwrap();
    assert!(v["node_count"].as_u64().unwrap() > 0);
    let fresh = ok(&["query", "--data", &data, "--queries", &queries, "--type", "knn", "--k", "5"]);
    let loaded = ok(&["query", "--index", &snap, "--queries", &queries, "--type", "knn", "--k", "5"]);
    let strip = |s: &str| -> Vec<serde_json::Value> {
        s.lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("elapsedMicros");
                v
            })
            .collect()
    };
    assert_eq!(strip(&fresh), strip(&loaded));
}

#[test]
fn seg_sweep_exports_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let (data, queries) = fixture(&dir);
    let csv = p(&dir, "sweep.csv");
    ok(&[
        "bench", "--data", &data, "--queries", &queries, "--seg", "10,15,20,25,30,35", "--engine", "gptree",
        "--format", "csv", "--out", &csv,
    ]);
    let rows = read_reports_csv(std::fs::File::open(Path::new(&csv)).unwrap()).unwrap();
    let segs: Vec<u32> = rows.iter().map(|r| r.seg).collect();
    assert_eq!(segs, [10, 15, 20, 25, 30, 35]);
    assert!(rows.iter().all(|r| r.engine == "gptree" && r.queries == 20));
}

#[test]
fn bench_reports_every_engine() {
    let dir = TempDir::new().unwrap();
    let (data, queries) = fixture(&dir);
    let out = ok(&["bench", "--data", &data, "--queries", &queries, "--warmup", "0"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let engines: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["engine"].as_str().unwrap()).collect();
    assert_eq!(engines, ["gptree", "str", "oracle"]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["gen-queries", "--count", "5", "--window", "2.0"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let (data, queries) = fixture(&dir);
    assert_eq!(run(&["bench", "--data", &data, "--queries", &queries, "--workers", "0"]).status.code(), Some(1));
    let missing = p(&dir, "missing.wkt");
    assert_eq!(run(&["query", "--data", &missing, "--queries", &queries]).status.code(), Some(2));
}
