// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the criterion benchmarks.

use gptree::{Envelope, Geometry, GridExtent, SpatialObject};
use gptree_cli::{generate_queries, generate_synthetic, KindMix, QueryShape, SynthSpec};

pub fn unit_envelope() -> Envelope {
    Envelope::new(0.0, 0.0, 1.0, 1.0).expect("valid envelope")
}

pub fn unit() -> GridExtent {
    GridExtent::new(unit_envelope()).expect("valid extent")
}

pub fn linestrings(count: usize, seed: u64) -> Vec<SpatialObject> {
    generate_synthetic(&SynthSpec::new(count, KindMix::LINESTRINGS, unit_envelope(), seed)).expect("synthetic data")
}

pub fn mixed(count: usize, seed: u64) -> Vec<SpatialObject> {
    generate_synthetic(&SynthSpec::new(count, KindMix::MIXED, unit_envelope(), seed)).expect("synthetic data")
}

pub fn windows(count: usize, shape: QueryShape, seed: u64) -> Vec<Geometry> {
    generate_queries(&unit_envelope(), count, shape, seed).expect("query windows")
}
