use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_all, FitnessEvaluator};
use crate::error::{Error, Result};
use crate::masking::LevelMask;
use crate::predictor::sigmoid;
use crate::LEVELS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    /// Inertia at the first iteration, decaying linearly to `w_end`.
    pub w_start: f64,
    pub w_end: f64,
    pub seed: u64,
}

impl Default for BpsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            iterations: 30,
            c1: 2.0,
            c2: 2.0,
            v_max: 6.0,
            w_start: 0.9,
            w_end: 0.4,
            seed: 0,
        }
    }
}

impl BpsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::arg("swarm size must be at least 1"));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(Error::arg("v_max must be positive"));
        }
        if !(self.w_start >= self.w_end) {
            return Err(Error::arg("inertia must not increase (w_start >= w_end)"));
        }
        if !(self.c1.is_finite() && self.c2.is_finite() && self.w_end.is_finite()) {
            return Err(Error::arg("acceleration constants and inertia must be finite"));
        }
        Ok(())
    }

    /// Inertia used at 1-based `iteration`.
    pub fn inertia(&self, iteration: usize) -> f64 {
        if self.iterations <= 1 {
            return self.w_start;
        }
        let frac = (iteration.saturating_sub(1)) as f64 / (self.iterations - 1) as f64;
        self.w_start - (self.w_start - self.w_end) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: LevelMask,
    pub velocity: [f64; LEVELS],
    pub personal_best: LevelMask,
    pub personal_best_fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedMask {
    pub mask: LevelMask,
    pub fitness: f64,
}

/// Swarm snapshot after evaluating one iteration (iteration 0 is the random
/// initial swarm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `None` for the initial swarm, which has not moved yet.
    pub inertia: Option<f64>,
    pub positions: Vec<LevelMask>,
    pub fitness: Vec<f64>,
    pub global_best: LevelMask,
    pub global_best_fitness: f64,
    /// Up to three best distinct masks seen so far, best first.
    pub top: Vec<RankedMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best: LevelMask,
    pub global_best_fitness: f64,
    pub iteration: usize,
    pub inertia: f64,
    pub history: Vec<IterationRecord>,
}

impl SwarmState {
    /// Best, second and third best distinct masks found during the run.
    pub fn top_masks(&self) -> &[RankedMask] {
        self.history.last().map(|h| h.top.as_slice()).unwrap_or(&[])
    }
}

/// `w·v + c₁r₁(s* − s) + c₂r₂(g − s)`, clamped to `[−v_max, v_max]`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    particle: &Particle,
    global_best: LevelMask,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
    v_max: f64,
) -> [f64; LEVELS] {
    let s = particle.position.as_reals();
    let own = particle.personal_best.as_reals();
    let swarm = global_best.as_reals();
    std::array::from_fn(|j| {
        let v = w * particle.velocity[j] + c1 * r1 * (own[j] - s[j]) + c2 * r2 * (swarm[j] - s[j]);
        v.clamp(-v_max, v_max)
    })
}

/// Bit `j` is set when `r3[j] < sigmoid(v[j])`.
pub fn position_update(velocity: &[f64; LEVELS], r3: &[f64; LEVELS]) -> LevelMask {
    let flags = std::array::from_fn(|j| r3[j] < sigmoid(velocity[j]));
    LevelMask::from_flags(&flags)
}

/// Random stream for particle `particle` at `iteration`; iteration 0 seeds the
/// initial swarm. Streams depend only on these counters, never on the order in
/// which particles are evaluated.
fn substream(seed: u64, iteration: usize, particle: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) | particle as u64);
    rng
}

struct Leaderboard {
    seen: HashMap<LevelMask, (f64, usize)>,
}

impl Leaderboard {
    fn record(&mut self, mask: LevelMask, fitness: f64) {
        let order = self.seen.len();
        self.seen.entry(mask).or_insert((fitness, order));
    }

    fn top(&self, n: usize) -> Vec<RankedMask> {
        let mut all: Vec<_> = self.seen.iter().map(|(m, &(f, o))| (*m, f, o)).collect();
        // Higher fitness first; among equals the earlier discovery wins.
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
        all.into_iter()
            .take(n)
            .map(|(mask, fitness, _)| RankedMask { mask, fitness })
            .collect()
    }
}

/// Level-grouped binary PSO maximizing `evaluator`. Personal and global bests
/// only move on a strictly greater fitness, updated in particle order after
/// the whole swarm has been evaluated.
pub fn bpso_select<E: FitnessEvaluator + ?Sized>(
    evaluator: &E,
    config: &BpsoConfig,
) -> Result<(LevelMask, SwarmState)> {
    config.validate()?;
    let k = config.swarm_size;

    let mut particles: Vec<Particle> = (0..k)
        .map(|p| {
            let mut rng = substream(config.seed, 0, p);
            let flags: [bool; LEVELS] = std::array::from_fn(|_| rng.gen_bool(0.5));
            let velocity = std::array::from_fn(|_| rng.gen_range(-config.v_max..=config.v_max));
            let position = LevelMask::from_flags(&flags);
            Particle {
                position,
                velocity,
                personal_best: position,
                personal_best_fitness: f64::NEG_INFINITY,
            }
        })
        .collect();

    let mut board = Leaderboard {
        seen: HashMap::new(),
    };
    let mut global_best = particles[0].position;
    let mut global_best_fitness = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(config.iterations + 1);

    let mut inertia = config.inertia(1);
    for iteration in 0..=config.iterations {
        if iteration > 0 {
            inertia = config.inertia(iteration);
            let gbest = global_best;
            for (p, particle) in particles.iter_mut().enumerate() {
                let mut rng = substream(config.seed, iteration, p);
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let r3: [f64; LEVELS] = std::array::from_fn(|_| rng.gen());
                let v = velocity_update(
                    particle,
                    gbest,
                    inertia,
                    config.c1,
                    config.c2,
                    r1,
                    r2,
                    config.v_max,
                );
                particle.velocity = v;
                particle.position = position_update(&v, &r3);
            }
        }

        let positions: Vec<LevelMask> = particles.iter().map(|p| p.position).collect();
        let fitness = evaluate_all(evaluator, &positions)?;

        for (particle, &f) in particles.iter_mut().zip(&fitness) {
            board.record(particle.position, f);
            if f > particle.personal_best_fitness {
                particle.personal_best = particle.position;
                particle.personal_best_fitness = f;
            }
            if f > global_best_fitness {
                global_best = particle.position;
                global_best_fitness = f;
            }
        }

        history.push(IterationRecord {
            iteration,
            inertia: (iteration > 0).then_some(inertia),
            positions,
            fitness,
            global_best,
            global_best_fitness,
            top: board.top(3),
        });
    }

    Ok((
        global_best,
        SwarmState {
            particles,
            global_best,
            global_best_fitness,
            iteration: config.iterations,
            inertia,
            history,
        },
    ))
}
