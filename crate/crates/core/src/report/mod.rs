//! Cross-run consensus statistics, performance tables and figures.

mod chart;
mod consensus;
mod performance;
mod record;

pub use chart::{parse_chart, render_chart, selection_frequency_chart, ChartKind, ChartSeries};
pub use consensus::{
    appearance_percentages, average_across_configs, averages_csv, ConfigKey, ConsensusColumn,
    ConsensusTable, SubsetSelector,
};
pub use performance::{
    format_mean_std, mean_and_std, performance_summary, DeltaRow, PerformanceRow,
    PerformanceSummary,
};
pub use record::{load_records, Method, RunRecord, SelectedMask};

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::experiment::write_atomic;
use crate::LEVELS;

pub const TABLE_BE_FINAL: &str = "table1_be_final_level.csv";
pub const TABLE_BPSO_FINAL: &str = "table2_bpso_final_mask.csv";
pub const TABLE_BE_PAIR: &str = "table3_be_two_level.csv";
pub const TABLE_BE_PAIR_AVERAGE: &str = "table4_be_two_level_average.csv";
pub const TABLE_BPSO_AVERAGE: &str = "table5_bpso_average.csv";
pub const TABLE_PERFORMANCE: &str = "table6_performance.csv";
pub const TABLE_DELTAS: &str = "table6_deltas.csv";
pub const FIGURE_BE: &str = "figure2_be_cardinality.svg";
pub const FIGURE_BPSO: &str = "figure3_bpso_best.svg";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Serialize)]
struct Summary<'a> {
    runs: usize,
    be_final_level: Option<&'a ConsensusTable>,
    be_two_level_average: Option<[f64; LEVELS]>,
    bpso_final_mask: Option<&'a ConsensusTable>,
    bpso_average: Option<[f64; LEVELS]>,
    performance: &'a PerformanceSummary,
}

/// Writes every table and figure the records support into `out` and returns
/// the paths written. Tables for a method with no runs are skipped.
pub fn write_reports(records: &[RunRecord], out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<()> {
        let path = out.join(name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
        Ok(())
    };

    let has = |m: Method| records.iter().any(|r| r.method == m);
    let mut be_final = None;
    let mut be_pair_avg = None;
    if has(Method::BackwardElimination) {
        let tables = (1..=3)
            .map(|c| appearance_percentages(records, SubsetSelector::BeCardinality(c)))
            .collect::<Result<Vec<_>>>()?;
        put(TABLE_BE_FINAL, &tables[0].to_csv())?;
        put(TABLE_BE_PAIR, &tables[1].to_csv())?;
        let avg = average_across_configs(&tables[1])?;
        put(TABLE_BE_PAIR_AVERAGE, &averages_csv(&avg))?;
        put(
            FIGURE_BE,
            &selection_frequency_chart(&tables, ChartKind::EliminationCardinality)?,
        )?;
        be_pair_avg = Some(avg);
        be_final = Some(tables.into_iter().next().expect("three tables"));
    }

    let mut bpso_final = None;
    let mut bpso_avg = None;
    if has(Method::Bpso) {
        let max_rank = records
            .iter()
            .filter(|r| r.method == Method::Bpso)
            .map(|r| r.selected.len())
            .min()
            .unwrap_or(1);
        let tables = (1..=max_rank)
            .map(|r| appearance_percentages(records, SubsetSelector::BpsoRank(r)))
            .collect::<Result<Vec<_>>>()?;
        put(TABLE_BPSO_FINAL, &tables[0].to_csv())?;
        let avg = average_across_configs(&tables[0])?;
        put(TABLE_BPSO_AVERAGE, &averages_csv(&avg))?;
        put(FIGURE_BPSO, &selection_frequency_chart(&tables, ChartKind::BpsoRanked)?)?;
        bpso_avg = Some(avg);
        bpso_final = Some(tables.into_iter().next().expect("at least one table"));
    }

    let performance = performance_summary(records)?;
    for w in &performance.warnings {
        log::warn!("{w}");
    }
    put(TABLE_PERFORMANCE, &performance.to_csv())?;
    put(TABLE_DELTAS, &performance.deltas_csv())?;

    let summary = Summary {
        runs: records.len(),
        be_final_level: be_final.as_ref(),
        be_two_level_average: be_pair_avg,
        bpso_final_mask: bpso_final.as_ref(),
        bpso_average: bpso_avg,
        performance: &performance,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    put(SUMMARY, &json)?;
    Ok(written)
}
