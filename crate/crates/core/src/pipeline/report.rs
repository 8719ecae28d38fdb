//! Evaluation reports: a JSON document and a plain-text table with one row per
//! setup and one column per rating source.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ModelSource, RunConfig};
use super::schema::SchemaName;
use crate::behavioral::Provenance;
use crate::eval::{Metric, SetupReport};

pub const REPORT_FORMAT: &str = "behavrank-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub config: RunConfig,
    pub schema: SchemaName,
    pub matches: usize,
    pub players: usize,
    pub models: ModelSource,
    /// Provenance of the weighted hybrid's models, when that source ran.
    pub model_provenance: Option<Provenance>,
    pub setups: Vec<SetupReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

fn metric_label(m: Metric) -> &'static str {
    match m {
        Metric::Accuracy => "accuracy (%)",
        Metric::Ndcg => "mean NDCG (%)",
    }
}

/// Fixed-width table; the best value of each row is starred.
pub fn render_table(report: &Report) -> String {
    let sources: Vec<String> = report.config.sources.iter().map(|s| s.to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset {}  matches {}  players {}  config {}",
        report.schema,
        report.matches,
        report.players,
        &report.config_hash[..12.min(report.config_hash.len())]
    );
    for metric in [Metric::Accuracy, Metric::Ndcg] {
        let present = report.setups.iter().any(|s| s.scores.iter().any(|x| x.metric == metric));
        if !present {
            continue;
        }
        let width = sources.iter().map(|s| s.len()).max().unwrap_or(0).max(8);
        let _ = writeln!(out, "\n{}", metric_label(metric));
        let _ = write!(out, "{:<12}", "setup");
        for s in &sources {
            let _ = write!(out, " {s:>width$}");
        }
        out.push('\n');
        for setup in &report.setups {
            let values: Vec<Option<f64>> = sources.iter().map(|s| setup.score(s, metric)).collect();
            let best = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = write!(out, "{:<12}", setup.setup.name());
            for v in &values {
                let cell = match v {
                    Some(v) if *v == best => format!("{:.1}*", v * 100.0),
                    Some(v) => format!("{:.1}", v * 100.0),
                    None => "-".to_string(),
                };
                let _ = write!(out, " {cell:>width$}");
            }
            out.push('\n');
        }
    }
    out
}
