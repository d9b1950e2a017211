use std::io::Write;

use crate::data::Split;

/// Default magnitude below which a weight counts as absent.
pub const DEFAULT_METRIC_THRESHOLD: f64 = 1e-3;

/// Fraction of entries with `|w_j| <= threshold`.
pub fn metric_sparsity(w: &[f64], threshold: f64) -> f64 {
    1.0 - count_above(w.iter().copied(), threshold) as f64 / w.len().max(1) as f64
}

/// `1 - sparsity`; the two always sum to exactly 1.
pub fn weight_density(w: &[f64], threshold: f64) -> f64 {
    1.0 - metric_sparsity(w, threshold)
}

pub(crate) fn count_above(values: impl Iterator<Item = f64>, threshold: f64) -> usize {
    values.filter(|v| v.abs() > threshold).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// Optimizer steps completed when the row was recorded.
    pub iteration: usize,
    pub split: Split,
    pub loss: f64,
    /// Classification accuracy, or R² clamped to [0, 1] for regression.
    pub accuracy: f64,
    /// Σ|w| over all weight matrices (biases excluded).
    pub weight_magnitude: f64,
    pub weight_density: f64,
}

impl MetricsRow {
    pub const CSV_HEADER: &'static str =
        "iteration,split,loss,accuracy,weight_magnitude,weight_density";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.iteration,
            self.split,
            self.loss,
            self.accuracy,
            self.weight_magnitude,
            self.weight_density
        )
    }
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", MetricsRow::CSV_HEADER)?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}
