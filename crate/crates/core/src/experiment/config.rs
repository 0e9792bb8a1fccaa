use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lob::{SplitConfig, WindowSpec};
use crate::predictor::{BackboneKind, TrainConfig};
use crate::report::Method;
use crate::selection::{BpsoConfig, EliminationConfig, TieBreak};
use crate::synth::SynthConfig;

use super::seed::{derive_seed, mix64};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub id: String,
    pub source: DataSource,
}

/// A full experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub window_length: usize,
    /// Keep every `stride`-th window origin.
    pub stride: usize,
    pub horizons: Vec<usize>,
    pub backbones: Vec<BackboneKind>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub root_seed: u64,
    pub alpha: f64,
    pub train_days: usize,
    pub test_days: usize,
    pub validation_fraction: f64,
    pub train: TrainConfig,
    pub bpso: BpsoConfig,
    pub elimination: EliminationConfig,
    pub output_dir: PathBuf,
    pub write_traces: bool,
    /// Wall-clock timings make records differ between identical runs, so they
    /// are only stored on request.
    pub record_wall_clock: bool,
}

/// One (dataset, backbone, method, horizon, repetition) job.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    pub dataset_id: String,
    pub backbone: BackboneKind,
    pub method: Method,
    pub horizon: usize,
    pub repetition: usize,
    pub seed: u64,
}

impl Cell {
    pub fn stem(&self) -> String {
        format!(
            "{}__{}__{}__H{}__rep{}",
            self.dataset_id,
            self.backbone.tag(),
            self.method.tag(),
            self.horizon,
            self.repetition
        )
    }
}

/// Splits `key=value` lines. `#` starts a comment; blank lines are skipped;
/// repeated keys are rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        if pairs.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(pairs)
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {value:?}")))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            window_length: 10,
            stride: 1,
            horizons: vec![10, 20, 50],
            backbones: BackboneKind::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            repetitions: 20,
            root_seed: 0,
            alpha: 0.002,
            train_days: 7,
            test_days: 3,
            validation_fraction: 0.25,
            train: TrainConfig::default(),
            bpso: BpsoConfig::default(),
            elimination: EliminationConfig::default(),
            output_dir: PathBuf::from("out"),
            write_traces: true,
            record_wall_clock: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses the config text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mut c = ExperimentConfig::default();
        let mut dataset_ids: Option<Vec<String>> = None;
        let mut dataset_keys: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut synth_seeded = BTreeSet::new();

        for (key, value) in &pairs {
            let v = value.as_str();
            match key.as_str() {
                "datasets" => dataset_ids = Some(list(v).map(String::from).collect()),
                "window.T" => c.window_length = num(key, v)?,
                "window.stride" => c.stride = num(key, v)?,
                "horizons" => c.horizons = list(v).map(|h| num(key, h)).collect::<Result<_>>()?,
                "backbones" => {
                    c.backbones = list(v)
                        .map(|b| BackboneKind::from_tag(b).map_err(|e| Error::Config(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "methods" => {
                    c.methods = list(v)
                        .map(|m| m.parse().map_err(|e: Error| Error::Config(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "repetitions" => c.repetitions = num(key, v)?,
                "seed" => c.root_seed = num(key, v)?,
                "alpha" => c.alpha = num(key, v)?,
                "split.train_days" => c.train_days = num(key, v)?,
                "split.test_days" => c.test_days = num(key, v)?,
                "split.validation_fraction" => c.validation_fraction = num(key, v)?,
                "train.learning_rate" => c.train.learning_rate = num(key, v)?,
                "train.batch_size" => c.train.batch_size = num(key, v)?,
                "train.max_epochs" => c.train.max_epochs = num(key, v)?,
                "train.early_stop_patience" => c.train.early_stop_patience = num(key, v)?,
                "bpso.swarm_size" => c.bpso.swarm_size = num(key, v)?,
                "bpso.iterations" => c.bpso.iterations = num(key, v)?,
                "bpso.c1" => c.bpso.c1 = num(key, v)?,
                "bpso.c2" => c.bpso.c2 = num(key, v)?,
                "bpso.v_max" => c.bpso.v_max = num(key, v)?,
                "bpso.w_start" => c.bpso.w_start = num(key, v)?,
                "bpso.w_end" => c.bpso.w_end = num(key, v)?,
                "be.stop_below" => c.elimination.stop_below = Some(num(key, v)?),
                "be.tie_break" => {
                    c.elimination.tie_break = match v {
                        "higher" => TieBreak::RemoveHigherLevel,
                        "lower" => TieBreak::RemoveLowerLevel,
                        _ => return Err(Error::Config(format!("be.tie_break must be higher or lower, got {v:?}"))),
                    }
                }
                "output.dir" => c.output_dir = base.join(v),
                "output.traces" => c.write_traces = num(key, v)?,
                "output.record_wall_clock" => c.record_wall_clock = num(key, v)?,
                _ => {
                    let rest = key
                        .strip_prefix("dataset.")
                        .and_then(|r| r.split_once('.'))
                        .ok_or_else(|| Error::Config(format!("unknown key {key}")))?;
                    let (id, field) = rest;
                    if field.strip_prefix("synth.") == Some("seed") {
                        synth_seeded.insert(id.to_string());
                    }
                    dataset_keys
                        .entry(id.to_string())
                        .or_default()
                        .insert(field.to_string(), value.clone());
                }
            }
        }

        let ids = dataset_ids.ok_or_else(|| Error::Config("missing key datasets".into()))?;
        for id in &ids {
            if !valid_id(id) {
                return Err(Error::Config(format!(
                    "dataset id {id:?} may only use letters, digits, '-' and '_'"
                )));
            }
            let fields = dataset_keys
                .remove(id)
                .ok_or_else(|| Error::Config(format!("dataset {id} has no source")))?;
            let source = if let Some(path) = fields.get("path") {
                if fields.len() > 1 {
                    return Err(Error::Config(format!("dataset {id} mixes path and synth keys")));
                }
                DataSource::File(base.join(path))
            } else {
                let synth: BTreeMap<String, String> = fields
                    .into_iter()
                    .map(|(k, v)| match k.strip_prefix("synth.") {
                        Some(f) => Ok((f.to_string(), v)),
                        None => Err(Error::Config(format!("unknown key dataset.{id}.{k}"))),
                    })
                    .collect::<Result<_>>()?;
                let mut cfg = SynthConfig::from_pairs(&synth)?;
                if !synth_seeded.contains(id) {
                    cfg.seed = mix64(c.root_seed ^ super::seed::hash_str(id));
                }
                DataSource::Synthetic(cfg)
            };
            c.datasets.push(DatasetSpec {
                id: id.clone(),
                source,
            });
        }
        if let Some(id) = dataset_keys.keys().next() {
            return Err(Error::Config(format!("dataset {id} is not listed in datasets")));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.datasets.is_empty() {
            return bad("no datasets".into());
        }
        let ids: BTreeSet<&str> = self.datasets.iter().map(|d| d.id.as_str()).collect();
        if ids.len() != self.datasets.len() {
            return bad("duplicate dataset id".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return bad("horizons must be a nonempty list of positive integers".into());
        }
        if self.backbones.is_empty() || self.methods.is_empty() {
            return bad("backbones and methods must be nonempty".into());
        }
        if self.window_length == 0 || self.stride == 0 {
            return bad("window.T and window.stride must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be non-negative".into());
        }
        self.train
            .validate()
            .and_then(|_| self.bpso.validate())
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("split.validation_fraction must lie in [0, 1)".into());
        }
        Ok(())
    }

    pub fn split_config(&self, horizon: usize) -> SplitConfig {
        SplitConfig {
            train_days: self.train_days,
            test_days: self.test_days,
            validation_fraction: self.validation_fraction,
            window: WindowSpec {
                length: self.window_length,
                horizon,
                alpha: self.alpha,
                stride: self.stride,
            },
        }
    }

    /// Every job of the grid, in a fixed order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for d in &self.datasets {
            for &backbone in &self.backbones {
                for &method in &self.methods {
                    for &horizon in &self.horizons {
                        for repetition in 0..self.repetitions {
                            out.push(Cell {
                                dataset_id: d.id.clone(),
                                backbone,
                                method,
                                horizon,
                                repetition,
                                seed: derive_seed(
                                    self.root_seed,
                                    &d.id,
                                    backbone,
                                    method,
                                    horizon,
                                    repetition,
                                ),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
