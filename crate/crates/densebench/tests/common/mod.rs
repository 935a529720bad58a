//! Published benchmark tables used as fixtures.

#![allow(dead_code)]

use std::path::PathBuf;

use densebench::commands::load_matrix;
use densebench_core::ranking::{ModelScores, PairwiseMatrix};
use serde::Deserialize;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[derive(Debug, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub epe: Vec<f64>,
    pub one_px: Vec<f64>,
    pub fl: Vec<f64>,
    /// Printed summary rows in (epe, one_px, fl) order.
    pub average: [f64; 3],
    pub median: [f64; 3],
}

#[derive(Debug, Deserialize)]
pub struct RobustnessTable {
    pub corruptions: Vec<String>,
    pub models: Vec<ModelRow>,
}

impl RobustnessTable {
    pub fn epe_scores(&self) -> Vec<ModelScores> {
        self.models
            .iter()
            .map(|m| ModelScores::new(m.name.clone(), self.corruptions.iter().cloned().zip(m.epe.iter().copied())))
            .collect()
    }
}

#[derive(Debug, Deserialize)]
pub struct Orderings {
    pub average: Vec<String>,
    pub median: Vec<String>,
    pub schulze: Vec<String>,
}

fn parse<T: for<'de> Deserialize<'de>>(name: &str) -> T {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    toml::from_str(&text).unwrap()
}

pub fn robustness_table() -> RobustnessTable {
    parse("table2.toml")
}

pub fn orderings() -> Orderings {
    parse("table4.toml")
}

pub fn pairwise_matrix() -> PairwiseMatrix {
    load_matrix(&fixture("table_a2.toml")).unwrap()
}
