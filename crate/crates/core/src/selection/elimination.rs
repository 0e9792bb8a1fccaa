use serde::{Deserialize, Serialize};

use super::{evaluate_all, FitnessEvaluator};
use crate::error::{Error, Result};
use crate::masking::LevelMask;

/// Which level to drop when several omissions score the same.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    RemoveHigherLevel,
    RemoveLowerLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EliminationConfig {
    pub tie_break: TieBreak,
    /// Stop early, before a removal, once the best remaining candidate scores
    /// below this value. Off by default: elimination runs to a single level.
    pub stop_below: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateFitness {
    /// Level left out.
    pub level: usize,
    /// Fitness of the remaining set without `level`.
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationRound {
    pub remaining: LevelMask,
    pub candidates: Vec<CandidateFitness>,
    pub removed: usize,
    pub fitness_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetFitness {
    pub mask: LevelMask,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationTrace {
    pub rounds: Vec<EliminationRound>,
    /// The last remaining level, when elimination ran to the end.
    pub final_level: Option<usize>,
    /// Best subset per cardinality, 10 levels first.
    pub subsets: Vec<SubsetFitness>,
}

impl EliminationTrace {
    /// Levels in removal order.
    pub fn removal_order(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.removed).collect()
    }

    pub fn subset_of_size(&self, size: usize) -> Option<&SubsetFitness> {
        self.subsets.iter().find(|s| s.mask.count() == size)
    }
}

pub fn backward_eliminate<E: FitnessEvaluator + ?Sized>(
    evaluator: &E,
    tie_break: TieBreak,
) -> Result<EliminationTrace> {
    backward_eliminate_with(
        evaluator,
        &EliminationConfig {
            tie_break,
            stop_below: None,
        },
    )
}

/// Starting from all ten levels, each round scores every remaining level's
/// omission and drops the level whose absence scores highest. On evaluator
/// failure the error carries the trace built so far.
pub fn backward_eliminate_with<E: FitnessEvaluator + ?Sized>(
    evaluator: &E,
    config: &EliminationConfig,
) -> Result<EliminationTrace> {
    let mut trace = EliminationTrace {
        rounds: Vec::new(),
        final_level: None,
        subsets: Vec::new(),
    };
    let abort = |trace: &EliminationTrace, e: Error| Error::Elimination {
        partial: Box::new(trace.clone()),
        source: Box::new(e),
    };

    let mut remaining = LevelMask::ALL;
    match evaluate_all(evaluator, &[remaining]) {
        Ok(f) => trace.subsets.push(SubsetFitness {
            mask: remaining,
            fitness: f[0],
        }),
        Err(e) => return Err(abort(&trace, e)),
    }

    while remaining.count() > 1 {
        let levels: Vec<usize> = remaining.levels().collect();
        let masks: Vec<LevelMask> = levels.iter().map(|&l| remaining.without(l)).collect();
        let scores = match evaluate_all(evaluator, &masks) {
            Ok(s) => s,
            Err(e) => return Err(abort(&trace, e)),
        };
        let candidates: Vec<CandidateFitness> = levels
            .iter()
            .zip(&scores)
            .map(|(&level, &fitness)| CandidateFitness { level, fitness })
            .collect();

        // `levels` is ascending, so `>=` keeps the highest level on ties.
        let pick = candidates
            .iter()
            .copied()
            .reduce(|best, c| {
                let better = match config.tie_break {
                    TieBreak::RemoveHigherLevel => c.fitness >= best.fitness,
                    TieBreak::RemoveLowerLevel => c.fitness > best.fitness,
                };
                if better {
                    c
                } else {
                    best
                }
            })
            .expect("at least two candidates");

        if config.stop_below.is_some_and(|t| pick.fitness < t) {
            return Ok(trace);
        }

        trace.rounds.push(EliminationRound {
            remaining,
            candidates,
            removed: pick.level,
            fitness_after: pick.fitness,
        });
        remaining = remaining.without(pick.level);
        trace.subsets.push(SubsetFitness {
            mask: remaining,
            fitness: pick.fitness,
        });
    }
    trace.final_level = remaining.levels().next();
    Ok(trace)
}
