//! Comparison reports: an aligned text table, a schema-versioned JSON tree
//! and the metadata sidecar that holds everything non-deterministic.

use epicast_core::backtest::{BacktestReport, Metrics, ReportRow};
use epicast_core::{Hyperparameters, ModelKind, Target};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub name: String,
    pub hyperparameters: Option<Hyperparameters>,
    /// Seed used for hyperparameter selection.
    pub seed: Option<u64>,
    pub seeds: Vec<u64>,
    pub validation_mse: Option<f64>,
    pub metrics: Option<Metrics>,
    pub mse_test_by_seed: Vec<f64>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuredReport {
    pub schema_version: u32,
    pub target: Target,
    pub note: String,
    pub test_fraction: f64,
    pub validation_fraction: f64,
    pub train_len: usize,
    pub test_len: usize,
    pub models: Vec<ModelReport>,
}

impl StructuredReport {
    pub fn new(target: Target, test_fraction: f64, report: &BacktestReport) -> Self {
        StructuredReport {
            schema_version: report.schema_version,
            target,
            note: report.note.clone(),
            test_fraction,
            validation_fraction: report.validation_fraction,
            train_len: report.train_len,
            test_len: report.test_len,
            models: report.rows.iter().map(model_report).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn model_report(row: &ReportRow) -> ModelReport {
    ModelReport {
        name: row.name.clone(),
        hyperparameters: row.hyperparameters.clone(),
        seed: row.seeds.first().copied(),
        seeds: row.seeds.clone(),
        validation_mse: row.validation_mse,
        metrics: row.metrics.clone(),
        mse_test_by_seed: row.mse_test_by_seed.clone(),
        error: row.error.clone(),
        warnings: row.warnings.clone(),
    }
}

/// Column header for a report row: the display name when the row is named
/// after a model kind.
fn column_name(name: &str) -> String {
    name.parse::<ModelKind>()
        .map(|k| k.display_name().to_string())
        .unwrap_or_else(|_| name.to_string())
}

/// Rows Train Score, Test Score, MSE Train, MSE Test; one column per model.
pub fn render_table(report: &BacktestReport) -> String {
    const LABELS: [&str; 4] = ["Train Score", "Test Score", "MSE Train", "MSE Test"];
    let mut columns: Vec<Vec<String>> = Vec::new();
    for row in &report.rows {
        let mut col = vec![column_name(&row.name)];
        match (&row.metrics, &row.error) {
            (Some(m), _) => {
                col.push(format!("{:.4}", m.r2_train));
                col.push(format!("{:.4}", m.r2_test));
                col.push(format!("{:.6}", m.mse_train));
                col.push(format!("{:.6}", m.mse_test));
            }
            (None, err) => {
                let cell = format!("error: {}", err.as_deref().unwrap_or("no result"));
                col.extend(std::iter::repeat_n(cell, 4));
            }
        }
        columns.push(col);
    }
    let label_width = LABELS.iter().map(|l| l.len()).max().unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().map(|s| s.len()).max().unwrap_or(0))
        .collect();

    let mut out = String::new();
    for line in 0..=LABELS.len() {
        let label = if line == 0 { "" } else { LABELS[line - 1] };
        out.push_str(&format!("{label:<label_width$}"));
        for (col, w) in columns.iter().zip(&widths) {
            out.push_str(&format!("  {:>w$}", col[line]));
        }
        let trimmed = out.trim_end_matches(' ').len();
        out.truncate(trimmed);
        out.push('\n');
    }
    out
}

/// Sidecar written next to every output: the effective configuration plus
/// wall time and a timestamp.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub outputs: Vec<String>,
    pub wall_ms: f64,
    /// Wall time per model row, where measured.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub model_wall_ms: Vec<(String, Option<f64>)>,
    pub timestamp: String,
    pub version: &'static str,
}

impl<'a, C: Serialize> Metadata<'a, C> {
    pub fn new(command: &'a str, config: &'a C, outputs: Vec<String>, wall_ms: f64) -> Self {
        Metadata {
            command,
            config,
            outputs,
            wall_ms,
            model_wall_ms: Vec::new(),
            timestamp: now_rfc3339(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

fn now_rfc3339() -> String {
    let since = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    chrono::DateTime::from_timestamp(since.as_secs() as i64, since.subsec_nanos())
        .map(|t| t.to_rfc3339_opts(chrono::SecondsFormat::Millis, true))
        .unwrap_or_default()
}

/// `x.json` -> `x.meta.json`.
pub fn sidecar_name(output: &str) -> String {
    match output.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}.meta.json"),
        None => format!("{output}.meta.json"),
    }
}
