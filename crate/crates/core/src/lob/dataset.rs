use serde::{Deserialize, Serialize};

use super::window::{build_windows_with, WindowSpec};
use super::{compute_stats, normalize, LobEvent, NormStats, SampleWindow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_days: usize,
    pub test_days: usize,
    /// Chronological tail of the training-day windows held out for validation.
    pub validation_fraction: f64,
    pub window: WindowSpec,
}

impl SplitConfig {
    pub fn new(length: usize, horizon: usize, alpha: f64) -> Self {
        Self {
            train_days: 7,
            test_days: 3,
            validation_fraction: 0.25,
            window: WindowSpec::new(length, horizon, alpha),
        }
    }
}

/// Normalized train/validation/test partitions. Immutable once built and safe
/// to share between concurrent training runs.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<SampleWindow>,
    pub validation: Vec<SampleWindow>,
    pub test: Vec<SampleWindow>,
    pub horizon: usize,
    pub window_length: usize,
    pub stats: NormStats,
}

/// The first `train_days` days feed training and validation, the last
/// `test_days` days the test set. Statistics come from the training part only.
pub fn split_dataset(events: &[LobEvent], config: &SplitConfig) -> Result<Dataset> {
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::arg(format!(
            "validation fraction must be in [0, 1), got {}",
            config.validation_fraction
        )));
    }
    if config.train_days == 0 || config.test_days == 0 {
        return Err(Error::arg("train_days and test_days must be positive"));
    }
    let mut day_ids: Vec<usize> = events.iter().map(|e| e.day_index).collect();
    day_ids.dedup();
    let mut sorted = day_ids.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != day_ids.len() {
        return Err(Error::arg("events are not grouped by trading day"));
    }
    if day_ids.len() < config.train_days + config.test_days {
        return Err(Error::arg(format!(
            "need {} trading days, found {}",
            config.train_days + config.test_days,
            day_ids.len()
        )));
    }
    let last_train_day = sorted[config.train_days - 1];
    let first_test_day = sorted[sorted.len() - config.test_days];

    let train_events: Vec<LobEvent> = events
        .iter()
        .filter(|e| e.day_index <= last_train_day)
        .cloned()
        .collect();
    let test_events: Vec<LobEvent> = events
        .iter()
        .filter(|e| e.day_index >= first_test_day)
        .cloned()
        .collect();

    let mut train = build_windows_with(&train_events, &config.window)?;
    let test = build_windows_with(&test_events, &config.window)?;
    let n_val = (train.len() as f64 * config.validation_fraction).floor() as usize;
    let validation = train.split_off(train.len() - n_val);
    if train.is_empty() {
        return Err(Error::arg("training days produce no windows"));
    }

    let stats = compute_stats(&train)?;
    Ok(Dataset {
        train: normalize(&train, &stats)?,
        validation: normalize(&validation, &stats)?,
        test: normalize(&test, &stats)?,
        horizon: config.window.horizon,
        window_length: config.window.length,
        stats,
    })
}
