//! Evaluation reports (TOML) and their text rendering.
//!
//! A report holds one section per evaluated field (optical flow, first- or
//! target-frame disparity). Each section is a corruption-by-metric table at
//! full precision with its Average and Median rows; the text rendering
//! rounds to two decimals.
//!
//! ```toml
//! schema = 1
//! model = "raft"
//! task = "flow"
//! [[sections]]
//! field = "flow"
//! metrics = ["epe", "1px", "fl"]
//! average = [..]
//! median = [..]
//! [[sections.rows]]
//! corruption = "brightness"
//! values = [0.33, 4.1, 1.2]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use densebench_core::metrics::{MetricKind, ReportRow, RobustnessReport};
use densebench_core::ranking::ModelScores;
use densebench_core::FieldKind;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Flow,
    Stereo,
    Sceneflow,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Flow => "flow",
            Task::Stereo => "stereo",
            Task::Sceneflow => "sceneflow",
        }
    }

    /// Fields evaluated by the task, in report order.
    pub fn fields(self) -> &'static [FieldKind] {
        match self {
            Task::Flow => &[FieldKind::Flow],
            Task::Stereo => &[FieldKind::Disparity1],
            Task::Sceneflow => &[FieldKind::Flow, FieldKind::Disparity2],
        }
    }

    pub fn default_metrics(self) -> Vec<MetricKind> {
        match self {
            Task::Flow => vec![MetricKind::Epe, MetricKind::OnePx, MetricKind::Fl],
            Task::Stereo => vec![MetricKind::Abs, MetricKind::OnePx, MetricKind::D1],
            Task::Sceneflow => vec![MetricKind::Epe, MetricKind::OnePx, MetricKind::Fl, MetricKind::Abs, MetricKind::D2],
        }
    }
}

/// File-name tag of a field kind in prediction trees.
pub fn field_tag(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::Flow => "flow",
        FieldKind::Disparity1 => "disp1",
        FieldKind::Disparity2 => "disp2",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub field: String,
    pub metrics: Vec<MetricKind>,
    pub average: Vec<f64>,
    pub median: Vec<f64>,
    pub rows: Vec<ReportRow>,
}

impl Section {
    pub fn new(field: FieldKind, table: &RobustnessReport) -> Result<Self> {
        let summary = if table.rows.is_empty() {
            Vec::new()
        } else {
            table.summary()?
        };
        Ok(Self {
            field: field_tag(field).to_string(),
            metrics: table.metrics.clone(),
            average: summary.iter().map(|s| s.average).collect(),
            median: summary.iter().map(|s| s.median).collect(),
            rows: table.rows.clone(),
        })
    }

    pub fn table(&self, model: &str) -> RobustnessReport {
        RobustnessReport {
            model: model.to_string(),
            metrics: self.metrics.clone(),
            rows: self.rows.clone(),
            clean_error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub model: String,
    pub task: Task,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("report fields are TOML-representable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = String::from_utf8(error::read(path)?).map_err(|e| Error::decode(path, e))?;
        let r: Report = toml::from_str(&text).map_err(|e| Error::decode(path, e))?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Contract(format!("{}: unsupported report schema {}", path.display(), r.schema)));
        }
        for s in &r.sections {
            s.table(&r.model).validate().map_err(|e| Error::in_file(path, e))?;
        }
        Ok(r)
    }

    /// Per-corruption values of `metric` from the first section carrying it.
    pub fn scores(&self, metric: MetricKind, path: &Path) -> Result<ModelScores> {
        let section = self
            .sections
            .iter()
            .find(|s| s.metrics.contains(&metric))
            .ok_or_else(|| Error::Contract(format!("{}: no {metric} column", path.display())))?;
        let column = section.table(&self.model).column(metric).map_err(|e| Error::in_file(path, e))?;
        Ok(ModelScores::new(self.model.clone(), column))
    }

    /// Fixed-width table with two decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model {}  task {}", self.model, self.task.name());
        for s in &self.sections {
            let width = s.rows.iter().map(|r| r.corruption.len()).max().unwrap_or(0).max(8);
            let _ = writeln!(out, "\n[{}]", s.field);
            let _ = write!(out, "{:width$}", "");
            for m in &s.metrics {
                let _ = write!(out, " {:>9}", m.name());
            }
            let _ = writeln!(out);
            let mut line = |label: &str, values: &[f64]| {
                let _ = write!(out, "{label:width$}");
                for v in values {
                    let _ = write!(out, " {v:>9.2}");
                }
                let _ = writeln!(out);
            };
            for r in &s.rows {
                line(&r.corruption, &r.values);
            }
            line("average", &s.average);
            line("median", &s.median);
        }
        out
    }
}
