//! Experiment grids: configuration, seed derivation and the per-cell
//! Baseline / BE / BPSO pipeline.

mod config;
mod seed;

pub use config::{parse_pairs, Cell, DataSource, DatasetSpec, ExperimentConfig};
pub use seed::{derive_seed, hash_str, mix64};

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lob::{parse_events, split_dataset, Dataset, LobEvent};
use crate::masking::LevelMask;
use crate::predictor::{evaluate, train};
use crate::report::{write_reports, Method, RunRecord, SelectedMask};
use crate::selection::{
    backward_eliminate_with, bpso_select, FitnessEvaluator, RunMetadata, TraceDocument,
    TrainingEvaluator,
};
use crate::synth::generate;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, creating parent directories as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::arg(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn load_source(spec: &DatasetSpec) -> Result<Vec<LobEvent>> {
    match &spec.source {
        DataSource::File(path) => parse_events(path),
        DataSource::Synthetic(cfg) => generate(cfg),
    }
}

/// Output of one cell.
#[derive(Debug, Clone)]
pub struct CellOutput {
    pub record: RunRecord,
    pub trace: Option<TraceDocument>,
}

fn selected(
    evaluator: &TrainingEvaluator<'_>,
    dataset: &Dataset,
    mask: LevelMask,
) -> Result<SelectedMask> {
    let fitness = evaluator.evaluate(mask)?;
    let model = evaluator.model(mask)?;
    let test_f1 = evaluate(&model, &dataset.test, mask)?.macro_f1;
    Ok(SelectedMask {
        mask,
        fitness,
        test_f1: Some(test_f1),
    })
}

/// Runs one grid cell on a prepared dataset.
pub fn run_cell(dataset: &Dataset, cell: &Cell, config: &ExperimentConfig) -> Result<CellOutput> {
    let start = Instant::now();
    let mut train_cfg = config.train;
    train_cfg.seed = cell.seed;
    let evaluator = TrainingEvaluator::new(dataset, cell.backbone, train_cfg);
    let metadata = RunMetadata {
        dataset_id: cell.dataset_id.clone(),
        backbone: cell.backbone,
        horizon: cell.horizon,
        window_length: config.window_length,
        seed: cell.seed,
        train: train_cfg,
    };

    let (chosen, evaluation_mask, trace, model) = match cell.method {
        Method::Baseline => {
            let (params, _) = train(dataset, LevelMask::ALL, cell.backbone, &train_cfg)?;
            let scored = if dataset.validation.is_empty() {
                &dataset.train
            } else {
                &dataset.validation
            };
            let fitness = evaluate(&params, scored, LevelMask::ALL)?.macro_f1;
            let test_f1 = evaluate(&params, &dataset.test, LevelMask::ALL)?.macro_f1;
            let chosen = vec![SelectedMask {
                mask: LevelMask::ALL,
                fitness,
                test_f1: Some(test_f1),
            }];
            (chosen, LevelMask::ALL, None, Arc::new(params))
        }
        Method::BackwardElimination => {
            let trace = backward_eliminate_with(&evaluator, &config.elimination)?;
            let chosen = trace
                .subsets
                .iter()
                .map(|s| selected(&evaluator, dataset, s.mask))
                .collect::<Result<Vec<_>>>()?;
            let last = chosen.last().map(|s| s.mask).unwrap_or(LevelMask::ALL);
            let doc = TraceDocument::elimination(metadata, config.elimination, trace);
            (chosen, last, Some(doc), evaluator.model(last)?)
        }
        Method::Bpso => {
            let mut bpso = config.bpso;
            bpso.seed = mix64(cell.seed);
            let (best, state) = bpso_select(&evaluator, &bpso)?;
            let chosen = state
                .top_masks()
                .iter()
                .map(|r| selected(&evaluator, dataset, r.mask))
                .collect::<Result<Vec<_>>>()?;
            let doc = TraceDocument::bpso(metadata, bpso, state);
            (chosen, best, Some(doc), evaluator.model(best)?)
        }
    };

    let test = evaluate(&model, &dataset.test, evaluation_mask)?;
    let record = RunRecord {
        dataset_id: cell.dataset_id.clone(),
        backbone: cell.backbone,
        method: cell.method,
        horizon: cell.horizon,
        repetition: cell.repetition,
        seed: cell.seed,
        selected: chosen,
        evaluation_mask,
        test,
        wall_seconds: config
            .record_wall_clock
            .then(|| start.elapsed().as_secs_f64()),
    };
    record.check()?;
    Ok(CellOutput {
        record,
        trace: if config.write_traces { trace } else { None },
    })
}

/// Files produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub record_files: Vec<PathBuf>,
    pub report_files: Vec<PathBuf>,
}

/// Prepares every (dataset, horizon) split, runs all cells on a pool of
/// `jobs` threads (all cores when `None`) and writes records, traces and
/// reports below `config.output_dir`. Records of cells that finish are kept
/// on disk even when another cell fails; the first failing cell in grid order
/// is reported.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutcome> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(config))
}

fn run_grid(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut datasets: HashMap<(String, usize), Dataset> = HashMap::new();
    for spec in &config.datasets {
        let events = load_source(spec)?;
        log::info!("dataset {}: {} events", spec.id, events.len());
        for &h in &config.horizons {
            let ds = split_dataset(&events, &config.split_config(h))
                .map_err(|e| Error::Data(format!("dataset {} at H={h}: {e}", spec.id)))?;
            if ds.train.is_empty() || ds.test.is_empty() {
                return Err(Error::Data(format!(
                    "dataset {} at H={h} yields no training or test windows",
                    spec.id
                )));
            }
            datasets.insert((spec.id.clone(), h), ds);
        }
    }

    let out = &config.output_dir;
    let records_dir = out.join("records");
    let traces_dir = out.join("traces");
    let cells = config.cells();
    let results: Vec<Result<(RunRecord, PathBuf)>> = cells
        .par_iter()
        .map(|cell| {
            let dataset = &datasets[&(cell.dataset_id.clone(), cell.horizon)];
            let wrap = |e: Error| Error::Cell {
                cell: cell.stem(),
                source: Box::new(e),
            };
            let output = run_cell(dataset, cell, config).map_err(wrap)?;
            let path = output.record.save(&records_dir).map_err(wrap)?;
            if let Some(trace) = &output.trace {
                trace
                    .save(&traces_dir.join(format!("{}.json", cell.stem())))
                    .map_err(wrap)?;
            }
            log::info!("finished {}", cell.stem());
            Ok((output.record, path))
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut record_files = Vec::with_capacity(results.len());
    for r in results {
        let (record, path) = r?;
        records.push(record);
        record_files.push(path);
    }
    let report_files = write_reports(&records, &out.join("reports"))?;
    Ok(ExperimentOutcome {
        records,
        record_files,
        report_files,
    })
}
