use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::consensus::ConfigKey;
use super::record::{Method, RunRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub config: ConfigKey,
    pub method: Method,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two runs.
    pub std: Option<f64>,
}

impl PerformanceRow {
    pub fn formatted(&self) -> String {
        match self.std {
            Some(sd) => format_mean_std(self.mean, sd),
            None => format!("{:05.2} ± --", 100.0 * self.mean),
        }
    }
}

/// Mean of Baseline minus method over the configurations of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub dataset_id: String,
    pub method: Method,
    pub configurations: usize,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSummary {
    pub rows: Vec<PerformanceRow>,
    pub deltas: Vec<DeltaRow>,
    pub warnings: Vec<String>,
}

impl PerformanceSummary {
    pub fn row(&self, config: &ConfigKey, method: Method) -> Option<&PerformanceRow> {
        self.rows
            .iter()
            .find(|r| &r.config == config && r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,backbone,horizon,method,runs,mean_f1,std_f1,formatted\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{}\n",
                r.config.dataset_id,
                r.config.backbone.tag(),
                r.config.horizon,
                r.method,
                r.runs,
                r.mean,
                r.std.map_or_else(String::new, |s| format!("{s:.6}")),
                r.formatted()
            ));
        }
        out
    }

    pub fn deltas_csv(&self) -> String {
        let mut out = String::from("dataset,method,configurations,mean_delta_pct\n");
        for d in &self.deltas {
            out.push_str(&format!(
                "{},{},{},{:.2}\n",
                d.dataset_id,
                d.method,
                d.configurations,
                100.0 * d.mean_delta
            ));
        }
        out
    }
}

/// Renders fractions as percentages in the `65.01 ± 00.36` style.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{:05.2} ± {:05.2}", 100.0 * mean, 100.0 * std)
}

/// Mean and sample standard deviation. Identical values give exactly zero.
pub fn mean_and_std(values: &[f64]) -> (f64, Option<f64>) {
    if let Some(&first) = values.first() {
        if values.iter().all(|&v| v == first) {
            return (first, (values.len() >= 2).then_some(0.0));
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    (mean, std)
}

/// Groups test macro-F1 by configuration and method, and reports how far each
/// selection method falls below Baseline on average per dataset.
pub fn performance_summary(records: &[RunRecord]) -> Result<PerformanceSummary> {
    if records.is_empty() {
        return Err(Error::arg("no records to summarize"));
    }
    let mut groups: BTreeMap<(ConfigKey, Method), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((ConfigKey::of(r), r.method))
            .or_default()
            .push(r.test.macro_f1);
    }
    let mut warnings = Vec::new();
    let rows: Vec<PerformanceRow> = groups
        .iter()
        .map(|((config, method), values)| {
            let (mean, std) = mean_and_std(values);
            if std.is_none() {
                warnings.push(format!("{config} {method}: one run, no standard deviation"));
            }
            PerformanceRow {
                config: config.clone(),
                method: *method,
                runs: values.len(),
                mean,
                std,
            }
        })
        .collect();

    let configs: Vec<&ConfigKey> = {
        let mut c: Vec<&ConfigKey> = groups.keys().map(|(c, _)| c).collect();
        c.dedup();
        c
    };
    let mut per_dataset: BTreeMap<(String, Method), Vec<f64>> = BTreeMap::new();
    for config in configs {
        let mean_of = |m: Method| {
            rows.iter()
                .find(|r| &r.config == config && r.method == m)
                .map(|r| r.mean)
        };
        let baseline = mean_of(Method::Baseline);
        for method in [Method::BackwardElimination, Method::Bpso] {
            match (baseline, mean_of(method)) {
                (Some(b), Some(m)) => per_dataset
                    .entry((config.dataset_id.clone(), method))
                    .or_default()
                    .push(b - m),
                (None, Some(_)) => {
                    warnings.push(format!("{config}: no Baseline runs to compare {method} with"))
                }
                _ => {}
            }
        }
    }
    let deltas = per_dataset
        .into_iter()
        .map(|((dataset_id, method), d)| DeltaRow {
            dataset_id,
            method,
            configurations: d.len(),
            mean_delta: d.iter().sum::<f64>() / d.len() as f64,
        })
        .collect();
    Ok(PerformanceSummary {
        rows,
        deltas,
        warnings,
    })
}
