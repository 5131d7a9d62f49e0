use std::io::Write;

use serde::Serialize;

use super::experiment::ResultRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_gain: f64,
    /// Sample standard deviation over `sqrt(trials)`; zero for a single trial.
    pub stderr_gain: f64,
}

/// Mean and standard error of total gain per (method, sweep point), in order
/// of first appearance. Skipped rows are ignored.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Empty("no result rows to summarize".into()));
    }
    let mut groups: Vec<(String, String, f64, Vec<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| !r.is_skipped()) {
        let key = |g: &(String, String, f64, Vec<f64>)| {
            g.0 == r.method && g.1 == r.sweep_var && g.2.to_bits() == r.sweep_value.to_bits()
        };
        match groups.iter_mut().find(|g| key(g)) {
            Some(g) => g.3.push(r.total_gain),
            None => groups.push((r.method.clone(), r.sweep_var.clone(), r.sweep_value, vec![r.total_gain])),
        }
    }
    if groups.is_empty() {
        return Err(Error::Empty("every row was skipped".into()));
    }
    Ok(groups
        .into_iter()
        .map(|(method, sweep_var, sweep_value, xs)| {
            let (mean, stderr) = mean_and_stderr(&xs);
            SummaryRow {
                method,
                sweep_var,
                sweep_value,
                trials: xs.len(),
                mean_gain: mean,
                stderr_gain: stderr,
            }
        })
        .collect())
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "sweep_var", "sweep_value", "trials", "mean_gain", "stderr_gain"])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.trials.to_string(),
            r.mean_gain.to_string(),
            r.stderr_gain.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
