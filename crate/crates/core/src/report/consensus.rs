use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::record::{Method, RunRecord};
use crate::error::{Error, Result};
use crate::masking::LevelMask;
use crate::predictor::BackboneKind;
use crate::LEVELS;

/// A table column: runs that share data, backbone and horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub dataset_id: String,
    pub backbone: BackboneKind,
    pub horizon: usize,
}

impl ConfigKey {
    pub fn of(record: &RunRecord) -> Self {
        Self {
            dataset_id: record.dataset_id.clone(),
            backbone: record.backbone,
            horizon: record.horizon,
        }
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/H{}", self.dataset_id, self.backbone.tag(), self.horizon)
    }
}

/// Which subset of a run counts as "selected".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetSelector {
    /// The BE subset with this many levels.
    BeCardinality(usize),
    /// The BPSO solution of this rank; 1 is the final mask.
    BpsoRank(usize),
}

impl SubsetSelector {
    pub const BPSO_FINAL: SubsetSelector = SubsetSelector::BpsoRank(1);

    fn method(self) -> Method {
        match self {
            SubsetSelector::BeCardinality(_) => Method::BackwardElimination,
            SubsetSelector::BpsoRank(_) => Method::Bpso,
        }
    }

    fn pick(self, record: &RunRecord) -> Option<LevelMask> {
        match self {
            SubsetSelector::BeCardinality(c) => record.subset(c),
            SubsetSelector::BpsoRank(r) => record.ranked(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusColumn {
    pub config: ConfigKey,
    /// Runs containing each level.
    pub counts: [u32; LEVELS],
    pub total: u32,
}

impl ConsensusColumn {
    pub fn percentage(&self, level: usize) -> f64 {
        100.0 * f64::from(self.counts[level - 1]) / f64::from(self.total)
    }
}

/// Appearance percentages; rows are levels 1..=10, columns configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusTable {
    pub selector: SubsetSelector,
    pub columns: Vec<ConsensusColumn>,
}

impl ConsensusTable {
    pub fn percentage(&self, level: usize, column: usize) -> f64 {
        self.columns[column].percentage(level)
    }

    pub fn column(&self, config: &ConfigKey) -> Option<&ConsensusColumn> {
        self.columns.iter().find(|c| &c.config == config)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.config.to_string());
        }
        out.push('\n');
        for level in 1..=LEVELS {
            out.push_str(&level.to_string());
            for c in &self.columns {
                out.push_str(&format!(",{:.2}", c.percentage(level)));
            }
            out.push('\n');
        }
        out
    }
}

/// Per configuration and level, the share of runs whose selected subset
/// contains the level. Runs are matched to the selector's method; a run of
/// that method lacking the selected subset is an error.
pub fn appearance_percentages(
    records: &[RunRecord],
    selector: SubsetSelector,
) -> Result<ConsensusTable> {
    let method = selector.method();
    let mut columns: BTreeMap<ConfigKey, ([u32; LEVELS], u32)> = BTreeMap::new();
    for record in records.iter().filter(|r| r.method == method) {
        let mask = selector.pick(record).ok_or_else(|| {
            Error::arg(format!(
                "run {} has no subset for {selector:?}",
                record.file_stem()
            ))
        })?;
        let (counts, total) = columns.entry(ConfigKey::of(record)).or_default();
        for level in mask.levels() {
            counts[level - 1] += 1;
        }
        *total += 1;
    }
    if columns.is_empty() {
        return Err(Error::arg(format!("no {method} runs to tabulate")));
    }
    Ok(ConsensusTable {
        selector,
        columns: columns
            .into_iter()
            .map(|(config, (counts, total))| ConsensusColumn {
                config,
                counts,
                total,
            })
            .collect(),
    })
}

/// Unweighted mean of each level's row across columns.
pub fn average_across_configs(table: &ConsensusTable) -> Result<[f64; LEVELS]> {
    if table.columns.is_empty() {
        return Err(Error::arg("empty consensus table"));
    }
    let n = table.columns.len() as f64;
    Ok(std::array::from_fn(|i| {
        table.columns.iter().map(|c| c.percentage(i + 1)).sum::<f64>() / n
    }))
}

pub fn averages_csv(averages: &[f64; LEVELS]) -> String {
    let mut out = String::from("level,average\n");
    for (i, a) in averages.iter().enumerate() {
        out.push_str(&format!("{},{:.2}\n", i + 1, a));
    }
    out
}
