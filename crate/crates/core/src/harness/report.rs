use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::protocol::Split;
use super::{Method, PipelineConfig, ProtocolConfig, Representation};
use crate::error::Result;
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub representation: Representation,
    pub subjects: usize,
    pub bands: usize,
    pub protocol: ProtocolConfig,
    pub pipeline: PipelineConfig,
    pub splits: Vec<Split>,
    /// Fused (majority-vote) probe accuracy of each repetition.
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over repetitions; 0 for a single one.
    pub std_accuracy: f64,
    /// Single-band accuracy pooled over repetitions. Diagnostic only.
    pub per_band_accuracy: Vec<f64>,
}

impl ExperimentReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        method: Method,
        representation: Representation,
        subjects: usize,
        bands: usize,
        protocol: ProtocolConfig,
        pipeline: PipelineConfig,
        splits: Vec<Split>,
        accuracies: Vec<f64>,
        per_band_accuracy: Vec<f64>,
    ) -> Self {
        let n = accuracies.len() as f64;
        let mean_accuracy = accuracies.iter().sum::<f64>() / n;
        let std_accuracy = if accuracies.len() > 1 {
            (accuracies.iter().map(|a| (a - mean_accuracy).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            method,
            representation,
            subjects,
            bands,
            protocol,
            pipeline,
            splits,
            accuracies,
            mean_accuracy,
            std_accuracy,
            per_band_accuracy,
        }
    }
}

/// Contents of a report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub reports: Vec<ExperimentReport>,
}

impl ReportSet {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = io::read_file(path.as_ref())?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Mean ± std accuracy (percent): one row per representation, one column
/// per method.
pub fn render_table(reports: &[ExperimentReport]) -> String {
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| reports.iter().any(|r| r.method == *m))
        .collect();
    let mut rows: Vec<Representation> = Vec::new();
    for r in reports {
        if !rows.contains(&r.representation) {
            rows.push(r.representation);
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:<16}", "representation");
    for m in &methods {
        let _ = write!(out, "{:>16}", m.label());
    }
    out.push('\n');
    for rep in rows {
        let _ = write!(out, "{:<16}", rep.to_string());
        for m in &methods {
            let cell = reports
                .iter()
                .find(|r| r.method == *m && r.representation == rep)
                .map(|r| format!("{:.1} ± {:.1}", 100.0 * r.mean_accuracy, 100.0 * r.std_accuracy))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, "{cell:>16}");
        }
        out.push('\n');
    }
    out
}
