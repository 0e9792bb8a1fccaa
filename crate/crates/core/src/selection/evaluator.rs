use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::lob::Dataset;
use crate::masking::LevelMask;
use crate::predictor::{evaluate, train, BackboneKind, ModelParams, TrainConfig};

/// Deterministic fitness of a level subset. Implementations must be safe to
/// call from several threads at once.
pub trait FitnessEvaluator: Sync {
    fn evaluate(&self, mask: LevelMask) -> Result<f64>;
}

impl<F> FitnessEvaluator for F
where
    F: Fn(LevelMask) -> Result<f64> + Sync,
{
    fn evaluate(&self, mask: LevelMask) -> Result<f64> {
        self(mask)
    }
}

/// Memoizes another evaluator. Since evaluators are deterministic per mask,
/// the cache never changes results, only how often the inner one runs.
pub struct CachedEvaluator<E> {
    inner: E,
    cache: Mutex<HashMap<LevelMask, f64>>,
}

impl<E: FitnessEvaluator> CachedEvaluator<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Number of distinct masks evaluated so far.
    pub fn distinct(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn into_inner(self) -> E {
        self.inner
    }
}

impl<E: FitnessEvaluator> FitnessEvaluator for CachedEvaluator<E> {
    fn evaluate(&self, mask: LevelMask) -> Result<f64> {
        if let Some(&f) = self.cache.lock().unwrap().get(&mask) {
            return Ok(f);
        }
        let f = self.inner.evaluate(mask)?;
        self.cache.lock().unwrap().insert(mask, f);
        Ok(f)
    }
}

/// Trains one backbone per mask with a fixed seed and returns the validation
/// macro-F1 of the selected snapshot (training macro-F1 when the validation
/// partition is empty). Trained models are kept so callers can score the
/// chosen masks on held-out data without retraining.
pub struct TrainingEvaluator<'a> {
    dataset: &'a Dataset,
    kind: BackboneKind,
    config: TrainConfig,
    models: Mutex<HashMap<LevelMask, (f64, Arc<ModelParams>)>>,
}

impl<'a> TrainingEvaluator<'a> {
    pub fn new(dataset: &'a Dataset, kind: BackboneKind, config: TrainConfig) -> Self {
        Self {
            dataset,
            kind,
            config,
            models: Mutex::new(HashMap::new()),
        }
    }

    pub fn kind(&self) -> BackboneKind {
        self.kind
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Number of distinct masks trained so far.
    pub fn trained(&self) -> usize {
        self.models.lock().unwrap().len()
    }

    fn fit(&self, mask: LevelMask) -> Result<(f64, Arc<ModelParams>)> {
        if let Some(hit) = self.models.lock().unwrap().get(&mask) {
            return Ok(hit.clone());
        }
        let (params, _) = train(self.dataset, mask, self.kind, &self.config)?;
        let scored = if self.dataset.validation.is_empty() {
            &self.dataset.train
        } else {
            &self.dataset.validation
        };
        let fitness = evaluate(&params, scored, mask)?.macro_f1;
        let entry = (fitness, Arc::new(params));
        self.models.lock().unwrap().insert(mask, entry.clone());
        Ok(entry)
    }

    /// The trained model behind `evaluate(mask)`.
    pub fn model(&self, mask: LevelMask) -> Result<Arc<ModelParams>> {
        Ok(self.fit(mask)?.1)
    }
}

impl FitnessEvaluator for TrainingEvaluator<'_> {
    fn evaluate(&self, mask: LevelMask) -> Result<f64> {
        Ok(self.fit(mask)?.0)
    }
}
