use serde::{Deserialize, Serialize};

use super::SampleWindow;
use crate::error::{Error, Result};
use crate::FEATURES;

/// Per-row z-score parameters. A row that is constant over the training data
/// gets standard deviation 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn identity() -> Self {
        Self {
            mean: vec![0.0; FEATURES],
            std: vec![1.0; FEATURES],
        }
    }
}

/// Population mean and standard deviation of each of the 40 rows, pooled over
/// every column of every window.
pub fn compute_stats(windows: &[SampleWindow]) -> Result<NormStats> {
    if windows.is_empty() {
        return Err(Error::arg("cannot compute statistics of an empty training set"));
    }
    let mut mean = vec![0.0; FEATURES];
    let mut std = vec![0.0; FEATURES];
    for row in 0..FEATURES {
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for w in windows {
            for &v in w.matrix.row(row) {
                sum += v;
                lo = lo.min(v);
                hi = hi.max(v);
                count += 1;
            }
        }
        let m = sum / count as f64;
        mean[row] = m;
        if lo == hi {
            mean[row] = lo;
            std[row] = 1.0;
            continue;
        }
        let var = windows
            .iter()
            .flat_map(|w| w.matrix.row(row))
            .map(|v| (v - m) * (v - m))
            .sum::<f64>()
            / count as f64;
        std[row] = var.sqrt();
    }
    Ok(NormStats { mean, std })
}

fn check(stats: &NormStats) -> Result<()> {
    if stats.mean.len() != FEATURES || stats.std.len() != FEATURES {
        return Err(Error::arg(format!(
            "normalization stats need {FEATURES} rows, got {}/{}",
            stats.mean.len(),
            stats.std.len()
        )));
    }
    if let Some(row) = stats.std.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::arg(format!(
            "row {} has non-positive standard deviation {}",
            row + 1,
            stats.std[row]
        )));
    }
    Ok(())
}

pub fn normalize(windows: &[SampleWindow], stats: &NormStats) -> Result<Vec<SampleWindow>> {
    check(stats)?;
    Ok(windows
        .iter()
        .map(|w| transform(w, |row, v| (v - stats.mean[row]) / stats.std[row]))
        .collect())
}

/// Inverse of [`normalize`].
pub fn denormalize(windows: &[SampleWindow], stats: &NormStats) -> Result<Vec<SampleWindow>> {
    check(stats)?;
    Ok(windows
        .iter()
        .map(|w| transform(w, |row, v| v * stats.std[row] + stats.mean[row]))
        .collect())
}

fn transform(w: &SampleWindow, f: impl Fn(usize, f64) -> f64) -> SampleWindow {
    let mut out = w.clone();
    for row in 0..out.matrix.rows() {
        for v in out.matrix.row_mut(row) {
            *v = f(row, *v);
        }
    }
    out
}
