//! Wrapper feature selection over book levels.
//!
//! Both engines only see a [`FitnessEvaluator`]: a deterministic map from a
//! [`LevelMask`] to a score in `[0, 1]`. The production evaluator,
//! [`TrainingEvaluator`], trains a backbone on the masked training windows and
//! scores it by validation macro-F1.

mod bpso;
mod elimination;
mod evaluator;
mod trace;

pub use bpso::{
    bpso_select, position_update, velocity_update, BpsoConfig, IterationRecord, Particle,
    RankedMask, SwarmState,
};
pub use elimination::{
    backward_eliminate, backward_eliminate_with, CandidateFitness, EliminationConfig,
    EliminationRound, EliminationTrace, SubsetFitness, TieBreak,
};
pub use evaluator::{CachedEvaluator, FitnessEvaluator, TrainingEvaluator};
pub use trace::{RunMetadata, TraceBody, TraceDocument};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::masking::LevelMask;

/// Evaluates masks concurrently and returns fitness values in input order.
/// The first failure in input order is reported.
pub(crate) fn evaluate_all<E: FitnessEvaluator + ?Sized>(
    evaluator: &E,
    masks: &[LevelMask],
) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = masks.par_iter().map(|&m| evaluator.evaluate(m)).collect();
    masks
        .iter()
        .zip(results)
        .map(|(&mask, r)| match r {
            Ok(f) if f.is_finite() => Ok(f),
            Ok(f) => Err(Error::Fitness {
                mask,
                message: format!("non-finite fitness {f}"),
            }),
            Err(Error::Fitness { mask, message }) => Err(Error::Fitness { mask, message }),
            Err(e) => Err(Error::Fitness {
                mask,
                message: e.to_string(),
            }),
        })
        .collect()
}
