use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::io::{fmt_f64, write_csv};
use crate::stats::RunningStats;

/// One Monte Carlo estimate with its normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci95: (f64, f64),
    pub reference: Option<f64>,
    /// Wall-clock time; left out of reports unless timing was requested so
    /// that output files stay byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl EstimatorReport {
    pub fn new(name: impl Into<String>, estimate: f64, std_error: f64, n_samples: u64) -> Self {
        let std_error = std_error.max(0.0);
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            estimate,
            std_error,
            n_samples,
            ci95: (estimate - 1.96 * std_error, estimate + 1.96 * std_error),
            reference: None,
            elapsed_seconds: None,
        }
    }

    /// Mean of `stats` scaled by `scale`.
    pub fn from_stats(name: impl Into<String>, stats: &RunningStats, scale: f64) -> Self {
        Self::new(name, scale * stats.mean, scale.abs() * stats.std_error(), stats.n)
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_reference(mut self, reference: Option<f64>) -> Self {
        self.reference = reference;
        self
    }

    pub fn with_elapsed(mut self, seconds: f64) -> Self {
        self.elapsed_seconds = Some(seconds);
        self
    }

    pub fn ci_half_width(&self) -> f64 {
        1.96 * self.std_error
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci95.0 <= value && value <= self.ci95.1
    }

    /// CSV summary: one row per report, parameters serialized as JSON.
    pub fn write_csv<W: Write>(reports: &[Self], w: W) -> Result<()> {
        let rows = reports.iter().map(|r| {
            vec![
                r.name.clone(),
                csv_quote(&serde_json::to_string(&r.params).unwrap_or_default()),
                fmt_f64(r.estimate),
                fmt_f64(r.std_error),
                r.n_samples.to_string(),
                fmt_f64(r.ci95.0),
                fmt_f64(r.ci95.1),
                r.reference.map(fmt_f64).unwrap_or_default(),
            ]
        });
        write_csv(
            w,
            &["name", "params", "estimate", "std_error", "n_samples", "ci95_low", "ci95_high", "reference"],
            rows,
        )
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}
