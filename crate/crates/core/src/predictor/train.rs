use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::predictions;
use super::{
    backward_rows, forward_rows, init_params, nll_and_dlogits, BackboneKind, F1Report, ModelParams,
    Workspace,
};
use crate::error::{Error, Result};
use crate::lob::{Dataset, MovementLabel, SampleWindow};
use crate::masking::LevelMask;
use crate::FEATURES;

/// Plain mini-batch gradient descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation macro-F1 improvement before stopping.
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 64,
            max_epochs: 50,
            early_stop_patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::arg("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::arg("batch size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean mini-batch loss over the epoch.
    pub loss: f64,
    /// Macro-F1 on the validation windows, or on the training windows when
    /// there are none.
    pub validation_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    /// Mean training loss of the initial parameters.
    pub initial_loss: f64,
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were returned, if any epoch ran.
    pub best_epoch: Option<usize>,
}

impl TrainingTrace {
    pub fn best_validation_f1(&self) -> Option<f64> {
        self.best_epoch.map(|e| self.epochs[e - 1].validation_f1)
    }
}

/// Trains on `dataset.train` masked by `mask` and keeps the epoch with the
/// best validation macro-F1. When the validation partition is empty the
/// training windows are used for model selection instead.
pub fn train(
    dataset: &Dataset,
    mask: LevelMask,
    kind: BackboneKind,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainingTrace)> {
    let selection = if dataset.validation.is_empty() {
        &dataset.train
    } else {
        &dataset.validation
    };
    train_windows(&dataset.train, selection, dataset.window_length, mask, kind, config)
}

pub fn train_windows(
    train: &[SampleWindow],
    validation: &[SampleWindow],
    window_length: usize,
    mask: LevelMask,
    kind: BackboneKind,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainingTrace)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::arg("cannot train on an empty training set"));
    }
    if let Some(w) = train
        .iter()
        .chain(validation)
        .find(|w| w.matrix.shape() != (FEATURES, window_length))
    {
        return Err(Error::arg(format!(
            "window is {}x{}, expected {FEATURES}x{window_length}",
            w.matrix.rows(),
            w.matrix.cols()
        )));
    }

    let rows = mask.rows();
    let mut params = init_params(kind, window_length, config.seed)?;
    let mut ws = Workspace::new(kind, window_length);
    let mut grad = params.zeros_like();

    let initial_loss = train
        .iter()
        .map(|w| {
            let p = forward_rows(&params, &w.matrix, &rows, &mut ws);
            nll_and_dlogits(&p, w.label, 1.0).0
        })
        .sum::<f64>()
        / train.len() as f64;

    let mut trace = TrainingTrace {
        initial_loss,
        epochs: Vec::new(),
        best_epoch: None,
    };
    let mut best: Option<(f64, ModelParams)> = None;
    let mut since_best = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xA076_1D64_78BD_642F);
    // Without a validation partition, snapshots are ranked on training data.
    let scored = if validation.is_empty() { train } else { validation };
    let labels: Vec<MovementLabel> = scored.iter().map(|w| w.label).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            grad.fill_zero();
            let scale = 1.0 / chunk.len() as f64;
            let mut batch_loss = 0.0;
            for &i in chunk {
                let w = &train[i];
                let p = forward_rows(&params, &w.matrix, &rows, &mut ws);
                let (l, d) = nll_and_dlogits(&p, w.label, scale);
                batch_loss += l;
                backward_rows(&params, &w.matrix, &rows, &mut ws, &d, &mut grad);
            }
            params.add_scaled(-config.learning_rate, &grad);
            epoch_loss += batch_loss * scale;
            batches += 1;
        }
        let loss = epoch_loss / batches as f64;
        if !loss.is_finite() || !params.is_finite() {
            return Err(Error::Evaluation(format!(
                "training diverged at epoch {epoch} (loss {loss})"
            )));
        }

        let preds = predictions(&params, scored, mask)?;
        let validation_f1 = F1Report::from_predictions(&labels, &preds)?.macro_f1;
        trace.epochs.push(EpochRecord {
            epoch,
            loss,
            validation_f1,
        });

        let improved = best.as_ref().map_or(true, |(f, _)| validation_f1 > *f);
        if improved {
            best = Some((validation_f1, params.clone()));
            trace.best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.early_stop_patience.max(1) {
                break;
            }
        }
    }

    Ok((best.map(|(_, p)| p).unwrap_or(params), trace))
}
