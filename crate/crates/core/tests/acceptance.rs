//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion and exits non-zero when any fails.
//!
//! `cargo test --test acceptance -- 4 8` runs a subset by number.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use levelscope::experiment::{
    derive_seed, run_cell, run_experiment, Cell, DataSource, DatasetSpec, ExperimentConfig,
};
use levelscope::lob::{split_dataset, Dataset};
use levelscope::masking::{mask_matrix, mask_matrix_oracle};
use levelscope::matrix::Matrix;
use levelscope::predictor::{
    evaluate, forward, init_params, loss_and_gradient, predict, F1Report, PROB_FLOOR,
};
use levelscope::report::{
    appearance_percentages, average_across_configs, Method, RunRecord, SelectedMask,
    SubsetSelector,
};
use levelscope::selection::{backward_eliminate, bpso_select, BpsoConfig, TieBreak};
use levelscope::synth::SynthConfig;
use levelscope::{
    BackboneKind, LevelMask, ModelParams, MovementLabel, SampleWindow, TrainConfig, FEATURES,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "mask oracle equivalence", Duration::from_secs(1), mask_oracle),
    (2, "gradient correctness", Duration::from_secs(30), gradients),
    (3, "F1 oracle", Duration::from_secs(5), f1_oracle),
    (4, "BPSO on mock fitness", Duration::from_secs(10), bpso_mock),
    (5, "BE additive oracle", Duration::from_secs(5), be_additive),
    (6, "planted-level recovery", Duration::from_secs(30 * 60), planted_level),
    (7, "beyond-best-level gain", Duration::from_secs(30 * 60), beyond_best_level),
    (8, "published table fixtures", Duration::from_secs(1), table_fixtures),
    (9, "grid determinism", Duration::from_secs(2 * 20 * 60), grid_determinism),
    (10, "generated data invariants", Duration::from_secs(60), data_invariants),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (n, name, limit, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.2} s, limit {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- criterion 1

/// I₁ (40×10) · diag-free s (10×1) · I₂ (1×T), built by explicit products.
fn mask_by_products(s: LevelMask, t: usize) -> Matrix {
    let i1 = Matrix::from_fn(FEATURES, 10, |i, k| if i / 4 == k { 1.0 } else { 0.0 });
    let flags = s.flags();
    let sv = Matrix::from_fn(10, 1, |k, _| if flags[k] { 1.0 } else { 0.0 });
    let i2 = Matrix::from_fn(1, t, |_, _| 1.0);
    i1.matmul(&sv).unwrap().matmul(&i2).unwrap()
}

fn mask_oracle() -> Outcome {
    let mut checked = 0;
    for t in [1, 3, 10] {
        for s in LevelMask::all_masks() {
            let m = mask_matrix(s, t).unwrap();
            let via_library = mask_matrix_oracle(s, t).unwrap();
            let via_products = mask_by_products(s, t);
            if m.matrix() != via_library.matrix() || m.matrix() != &via_products {
                return outcome(false, format!("mask {s} differs at T={t}"));
            }
            checked += 1;
        }
    }
    outcome(checked == 3 * 1024, format!("{checked} (mask, T) pairs identical"))
}

// ---------------------------------------------------------------- criterion 2

fn random_params(kind: BackboneKind, t: usize, rng: &mut ChaCha8Rng) -> ModelParams {
    let mut p = init_params(kind, t, rng.gen()).unwrap();
    let flat: Vec<f64> = p.flat().iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect();
    p.set_flat(&flat).unwrap();
    p
}

fn floored_loss(p: &ModelParams, batch: &[(Matrix, MovementLabel)]) -> f64 {
    batch
        .iter()
        .map(|(x, y)| -forward(p, x).unwrap()[y.index()].max(PROB_FLOOR).ln())
        .sum::<f64>()
        / batch.len() as f64
}

fn gradients() -> Outcome {
    let t = 5;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for kind in BackboneKind::ALL {
        for instance in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + instance);
            let params = random_params(kind, t, &mut rng);
            let batch: Vec<(Matrix, MovementLabel)> = (0..3)
                .map(|_| {
                    let x = Matrix::from_fn(FEATURES, t, |_, _| rng.gen_range(-2.0..2.0));
                    (x, MovementLabel::ALL[rng.gen_range(0..3)])
                })
                .collect();
            let (_, grad) = loss_and_gradient(&params, &batch).unwrap();
            let analytic = grad.flat();
            let base = params.flat();
            let mut probe = params.clone();
            for i in 0..base.len() {
                let mut v = base.clone();
                v[i] += h;
                probe.set_flat(&v).unwrap();
                let up = floored_loss(&probe, &batch);
                v[i] = base[i] - h;
                probe.set_flat(&v).unwrap();
                let down = floored_loss(&probe, &batch);
                let numeric = (up - down) / (2.0 * h);
                let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic[i] - numeric).abs() / denom);
            }
            instances += 1;
        }
    }
    outcome(
        worst <= 1e-4,
        format!("{instances} instances, max relative error {worst:.2e} (tolerance 1e-4)"),
    )
}

// ---------------------------------------------------------------- criterion 3

fn brute_force_macro_f1(labels: &[MovementLabel], preds: &[MovementLabel]) -> f64 {
    let mut f1 = [0.0; 3];
    for (c, class) in MovementLabel::ALL.into_iter().enumerate() {
        let tp = labels.iter().zip(preds).filter(|(l, p)| **l == class && **p == class).count();
        let fp = labels.iter().zip(preds).filter(|(l, p)| **l != class && **p == class).count();
        let fn_ = labels.iter().zip(preds).filter(|(l, p)| **l == class && **p != class).count();
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        f1[c] = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
    }
    (f1[0] + f1[1] + f1[2]) / 3.0
}

fn f1_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = 4;
    for set in 0..100 {
        let n = rng.gen_range(1..=200);
        // Skew the label distribution per set so classes are sometimes absent.
        let weights: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let draw = |rng: &mut ChaCha8Rng| {
            let u = rng.gen_range(0.0..weights.iter().sum::<f64>());
            if u < weights[0] {
                MovementLabel::Up
            } else if u < weights[0] + weights[1] {
                MovementLabel::Down
            } else {
                MovementLabel::Stationary
            }
        };
        let labels: Vec<MovementLabel> = (0..n).map(|_| draw(&mut rng)).collect();
        let preds: Vec<MovementLabel> = (0..n).map(|_| draw(&mut rng)).collect();
        let oracle = brute_force_macro_f1(&labels, &preds);
        let report = F1Report::from_predictions(&labels, &preds).unwrap();
        if report.macro_f1 != oracle {
            return outcome(false, format!("set {set}: {} vs oracle {oracle}", report.macro_f1));
        }

        // The same check through a model: evaluate() against predict().
        let kind = BackboneKind::ALL[set % 2];
        let params = random_params(kind, t, &mut rng);
        let windows: Vec<SampleWindow> = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| SampleWindow {
                matrix: Matrix::from_fn(FEATURES, t, |_, _| rng.gen_range(-3.0..3.0)),
                label,
                day_index: 0,
                time_index: i,
            })
            .collect();
        let model_preds: Vec<MovementLabel> =
            windows.iter().map(|w| predict(&params, &w.matrix).unwrap()).collect();
        let oracle = brute_force_macro_f1(&labels, &model_preds);
        let evaluated = evaluate(&params, &windows, LevelMask::ALL).unwrap().macro_f1;
        if evaluated != oracle {
            return outcome(false, format!("model set {set}: {evaluated} vs oracle {oracle}"));
        }
    }
    outcome(true, "100 random sets, macro-F1 identical to brute force")
}

// ---------------------------------------------------------------- criterion 4

fn bpso_mock() -> Outcome {
    let target: LevelMask = "1100000000".parse().unwrap();
    let f = move |s: LevelMask| Ok((10.0 - s.hamming(target) as f64) / 10.0);
    // Brute force: the target is the unique maximizer.
    let scores: Vec<(LevelMask, f64)> = LevelMask::all_masks().map(|s| (s, f(s).unwrap())).collect();
    let best = scores.iter().map(|(_, v)| *v).fold(f64::MIN, f64::max);
    let argmax: Vec<LevelMask> = scores.iter().filter(|(_, v)| *v == best).map(|(s, _)| *s).collect();
    if argmax != [target] {
        return outcome(false, format!("optimum is not unique: {argmax:?}"));
    }
    let mut found = 0;
    for seed in 0..20 {
        let config = BpsoConfig {
            swarm_size: 10,
            iterations: 50,
            seed,
            ..BpsoConfig::default()
        };
        let (mask, state) = bpso_select(&f, &config).unwrap();
        let monotone = state
            .history
            .windows(2)
            .all(|w| w[1].global_best_fitness >= w[0].global_best_fitness);
        if !monotone {
            return outcome(false, format!("seed {seed}: global best decreased"));
        }
        if state.global_best_fitness != f(mask).unwrap() {
            return outcome(false, format!("seed {seed}: reported fitness mismatch"));
        }
        if mask == target {
            found += 1;
        }
    }
    outcome(found >= 18, format!("target recovered in {found}/20 runs (need 18)"))
}

// ---------------------------------------------------------------- criterion 5

fn be_additive() -> Outcome {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights: Vec<f64> = (0..10).map(|_| rng.gen_range(0.01..1.0)).collect();
        weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
        weights.dedup();
        if weights.len() != 10 {
            return outcome(false, format!("seed {seed}: weights not strictly decreasing"));
        }
        let f = move |s: LevelMask| Ok(s.levels().map(|k| weights[k - 1]).sum::<f64>());
        let trace = backward_eliminate(&f, TieBreak::RemoveHigherLevel).unwrap();
        if trace.rounds.len() != 9 {
            return outcome(false, format!("seed {seed}: {} rounds", trace.rounds.len()));
        }
        if trace.removal_order() != [10, 9, 8, 7, 6, 5, 4, 3, 2] || trace.final_level != Some(1) {
            return outcome(
                false,
                format!("seed {seed}: removal order {:?}", trace.removal_order()),
            );
        }
    }
    outcome(true, "removal order 10..2 and final level 1 in 20/20 seeds")
}

// ------------------------------------------------------- end-to-end settings

/// Training schedule for the synthetic end-to-end criteria: every 10th window,
/// a few epochs with a larger step size.
fn fast_train() -> TrainConfig {
    TrainConfig {
        learning_rate: 0.1,
        batch_size: 16,
        max_epochs: 3,
        early_stop_patience: 5,
        seed: 0,
    }
}

fn synthetic_grid_config(synth: SynthConfig) -> ExperimentConfig {
    ExperimentConfig {
        datasets: vec![DatasetSpec {
            id: "planted".into(),
            source: DataSource::Synthetic(synth),
        }],
        window_length: 10,
        stride: 10,
        horizons: vec![10],
        repetitions: 20,
        root_seed: 2024,
        train: fast_train(),
        // Half the default iterations: the planted level is found early and
        // the full schedule would not fit the time limit on one core.
        bpso: BpsoConfig {
            iterations: 15,
            ..BpsoConfig::default()
        },
        write_traces: false,
        ..ExperimentConfig::default()
    }
}

fn prepare(config: &ExperimentConfig, synth: &SynthConfig) -> Dataset {
    let events = levelscope::synth::generate(synth).unwrap();
    split_dataset(&events, &config.split_config(10)).unwrap()
}

fn cell(config: &ExperimentConfig, backbone: BackboneKind, method: Method, rep: usize) -> Cell {
    Cell {
        dataset_id: "planted".into(),
        backbone,
        method,
        horizon: 10,
        repetition: rep,
        seed: derive_seed(config.root_seed, "planted", backbone, method, 10, rep),
    }
}

// ---------------------------------------------------------------- criterion 6

fn planted_level() -> Outcome {
    let base = SynthConfig {
        days: 10,
        events_per_day: 2000,
        informative_levels: LevelMask::single(1).unwrap(),
        signal_strength: 0.9,
        ..SynthConfig::default()
    };
    let config = synthetic_grid_config(base.clone());
    let mut pass = true;
    let mut details = Vec::new();
    for backbone in BackboneKind::ALL {
        let (mut be_hits, mut bpso_hits) = (0, 0);
        for rep in 0..20 {
            let synth = SynthConfig {
                seed: 600 + rep as u64,
                ..base.clone()
            };
            let dataset = prepare(&config, &synth);
            let be = run_cell(&dataset, &cell(&config, backbone, Method::BackwardElimination, rep), &config)
                .unwrap()
                .record;
            if be.evaluation_mask == LevelMask::single(1).unwrap() {
                be_hits += 1;
            }
            let bpso = run_cell(&dataset, &cell(&config, backbone, Method::Bpso, rep), &config)
                .unwrap()
                .record;
            if bpso.evaluation_mask.contains(1) {
                bpso_hits += 1;
            }
            eprintln!(
                "  {} run {rep}: BE final {}, BPSO {}",
                backbone.tag(),
                be.evaluation_mask,
                bpso.evaluation_mask
            );
        }
        pass &= be_hits >= 18 && bpso_hits >= 16;
        details.push(format!(
            "{}: BE final level 1 in {be_hits}/20 (need 18), BPSO mask has level 1 in {bpso_hits}/20 (need 16)",
            backbone.tag()
        ));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- criterion 7

fn beyond_best_level() -> Outcome {
    let base = SynthConfig {
        days: 10,
        events_per_day: 2000,
        informative_levels: LevelMask::from_levels([1, 2, 3]).unwrap(),
        signal_strength: 0.3,
        signal_decay: 0.8,
        ..SynthConfig::default()
    };
    let config = synthetic_grid_config(base.clone());
    let mut pass = true;
    let mut details = Vec::new();
    for backbone in BackboneKind::ALL {
        let deltas: Vec<f64> = (0..20)
            .map(|rep| {
                let synth = SynthConfig {
                    seed: 700 + rep as u64,
                    ..base.clone()
                };
                let dataset = prepare(&config, &synth);
                let baseline = run_cell(&dataset, &cell(&config, backbone, Method::Baseline, rep), &config)
                    .unwrap()
                    .record;
                let be = run_cell(
                    &dataset,
                    &cell(&config, backbone, Method::BackwardElimination, rep),
                    &config,
                )
                .unwrap()
                .record;
                assert_eq!(be.evaluation_mask.count(), 1);
                eprintln!(
                    "  {} run {rep}: baseline {:.4}, best level {} {:.4}",
                    backbone.tag(),
                    baseline.test.macro_f1,
                    be.evaluation_mask,
                    be.test.macro_f1
                );
                baseline.test.macro_f1 - be.test.macro_f1
            })
            .collect();
        let n = deltas.len() as f64;
        let mean = deltas.iter().sum::<f64>() / n;
        let sd = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let margin = 2.0 * sd / n.sqrt();
        pass &= mean > margin;
        details.push(format!(
            "{}: mean gain {:.4} vs 2-sigma bound {:.4}",
            backbone.tag(),
            mean,
            margin
        ));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- criterion 8

/// Column percentages (levels 1..10) of the BE two-level table, 12 columns.
const TWO_LEVEL_TABLE: [[u32; 10]; 12] = [
    [100, 10, 0, 10, 10, 5, 15, 20, 25, 5],
    [100, 20, 20, 0, 5, 15, 10, 15, 15, 0],
    [100, 15, 25, 5, 10, 5, 20, 5, 0, 15],
    [100, 15, 20, 5, 0, 20, 15, 5, 15, 5],
    [100, 35, 20, 20, 0, 10, 5, 5, 0, 5],
    [100, 25, 15, 25, 0, 15, 5, 0, 0, 15],
    [100, 5, 5, 15, 10, 5, 25, 15, 10, 10],
    [100, 10, 5, 10, 5, 15, 20, 10, 20, 5],
    [100, 30, 10, 5, 20, 5, 5, 20, 0, 5],
    [80, 35, 10, 20, 10, 10, 15, 10, 5, 5],
    [100, 55, 5, 5, 0, 5, 5, 15, 5, 5],
    [100, 50, 20, 10, 5, 10, 0, 0, 0, 5],
];

/// Column percentages of the BPSO final-solution table, 12 columns.
const BPSO_TABLE: [[u32; 10]; 12] = [
    [100, 20, 0, 0, 0, 0, 0, 0, 0, 10],
    [100, 10, 10, 0, 0, 0, 0, 0, 10, 0],
    [60, 30, 10, 0, 0, 0, 0, 10, 0, 10],
    [100, 0, 10, 0, 10, 0, 10, 0, 20, 0],
    [100, 10, 0, 10, 10, 0, 0, 0, 0, 0],
    [80, 10, 20, 0, 0, 0, 0, 0, 0, 0],
    [60, 30, 10, 0, 0, 0, 0, 0, 0, 0],
    [50, 20, 30, 0, 10, 0, 0, 0, 0, 0],
    [50, 20, 10, 10, 10, 0, 0, 0, 0, 0],
    [50, 20, 30, 0, 0, 0, 0, 0, 0, 0],
    [90, 10, 0, 0, 10, 0, 0, 0, 0, 0],
    [70, 20, 0, 0, 0, 10, 0, 0, 0, 0],
];

const RUNS: usize = 20;

fn column_key(col: usize) -> (String, BackboneKind, usize) {
    let dataset = if col < 6 { "us" } else { "nordic" };
    let backbone = BackboneKind::ALL[(col / 3) % 2];
    (dataset.to_string(), backbone, [10, 20, 50][col % 3])
}

fn fixture_record(col: usize, rep: usize, method: Method, selected: Vec<SelectedMask>) -> RunRecord {
    let (dataset_id, backbone, horizon) = column_key(col);
    RunRecord {
        dataset_id,
        backbone,
        method,
        horizon,
        repetition: rep,
        seed: rep as u64,
        evaluation_mask: selected.last().unwrap().mask,
        selected,
        test: F1Report::from_confusion([[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
        wall_seconds: None,
    }
}

fn entry(mask: LevelMask) -> SelectedMask {
    SelectedMask {
        mask,
        fitness: 0.5,
        test_f1: None,
    }
}

/// Twenty BE runs whose two-level subsets reproduce `column`: level slots are
/// listed in level order and slot i is paired with slot i + 20.
fn two_level_runs(col: usize, column: &[u32; 10]) -> Vec<RunRecord> {
    let slots: Vec<usize> = column
        .iter()
        .enumerate()
        .flat_map(|(k, &pct)| std::iter::repeat(k + 1).take(pct as usize * RUNS / 100))
        .collect();
    assert_eq!(slots.len(), 2 * RUNS, "column {col} does not sum to 200%");
    (0..RUNS)
        .map(|rep| {
            let (a, b) = (slots[rep], slots[rep + RUNS]);
            assert_ne!(a, b);
            let mut order = vec![a, b];
            order.extend((1..=10).filter(|l| *l != a && *l != b));
            let selected = (1..=10)
                .rev()
                .map(|size| entry(LevelMask::from_levels(order[..size].iter().copied()).unwrap()))
                .collect();
            fixture_record(col, rep, Method::BackwardElimination, selected)
        })
        .collect()
}

/// Twenty BPSO runs whose final masks reproduce `column`: each level's runs
/// continue where the previous level's stopped, wrapping around.
fn bpso_runs(col: usize, column: &[u32; 10]) -> Vec<RunRecord> {
    let mut masks = vec![LevelMask::NONE; RUNS];
    let mut next = 0;
    for (k, &pct) in column.iter().enumerate() {
        for _ in 0..pct as usize * RUNS / 100 {
            masks[next % RUNS] = masks[next % RUNS].with(k + 1);
            next += 1;
        }
    }
    masks
        .into_iter()
        .enumerate()
        .map(|(rep, m)| fixture_record(col, rep, Method::Bpso, vec![entry(m)]))
        .collect()
}

fn table_fixtures() -> Outcome {
    let be: Vec<RunRecord> = TWO_LEVEL_TABLE
        .iter()
        .enumerate()
        .flat_map(|(c, col)| two_level_runs(c, col))
        .collect();
    let bpso: Vec<RunRecord> = BPSO_TABLE
        .iter()
        .enumerate()
        .flat_map(|(c, col)| bpso_runs(c, col))
        .collect();

    let pair_table = appearance_percentages(&be, SubsetSelector::BeCardinality(2)).unwrap();
    let bpso_table = appearance_percentages(&bpso, SubsetSelector::BPSO_FINAL).unwrap();
    // The tables must reproduce the inputs cell by cell.
    for (table, source) in [(&pair_table, &TWO_LEVEL_TABLE), (&bpso_table, &BPSO_TABLE)] {
        for (c, column) in source.iter().enumerate() {
            let (dataset_id, backbone, horizon) = column_key(c);
            let col = table
                .columns
                .iter()
                .find(|x| {
                    x.config.dataset_id == dataset_id
                        && x.config.backbone == backbone
                        && x.config.horizon == horizon
                })
                .unwrap();
            for level in 1..=10 {
                assert_eq!(col.percentage(level), f64::from(column[level - 1]));
            }
        }
    }
    let pair_avg = format!("{:.2}", average_across_configs(&pair_table).unwrap()[0]);
    let bpso_avg = format!("{:.2}", average_across_configs(&bpso_table).unwrap()[0]);
    outcome(
        pair_avg == "98.33" && bpso_avg == "75.83",
        format!("two-level row 1 average {pair_avg}% (want 98.33), BPSO row 1 average {bpso_avg}% (want 75.83)"),
    )
}

// ---------------------------------------------------------------- criterion 9

const GRID: &str = "
datasets = alpha, beta
dataset.alpha.synth.days = 10
dataset.alpha.synth.events_per_day = 200
dataset.alpha.synth.informative_levels = 1
dataset.beta.synth.days = 10
dataset.beta.synth.events_per_day = 200
dataset.beta.synth.informative_levels = 1|2
dataset.beta.synth.signal_strength = 0.6
window.T = 10
window.stride = 5
horizons = 10, 20, 50
backbones = bilinear, conv
methods = be, bpso
repetitions = 5
seed = 11
train.max_epochs = 10
train.learning_rate = 0.05
train.batch_size = 16
train.early_stop_patience = 2
bpso.iterations = 5
";

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["records", "reports", "traces"] {
        let mut entries: Vec<_> = std::fs::read_dir(dir.join(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            let name = format!("{sub}/{}", p.file_name().unwrap().to_string_lossy());
            files.push((name, std::fs::read(&p).unwrap()));
        }
    }
    files
}

fn grid_determinism() -> Outcome {
    let mut runs = Vec::new();
    let mut timings = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::parse(GRID, dir.path()).unwrap();
        config.output_dir = dir.path().join("out");
        let start = Instant::now();
        let result = run_experiment(&config, None).unwrap();
        timings.push(start.elapsed().as_secs_f64());
        eprintln!("  grid run finished in {:.0} s", timings.last().unwrap());
        assert_eq!(result.records.len(), 24 * 5);
        runs.push(snapshot(&config.output_dir));
    }
    let cells: std::collections::BTreeSet<_> = ExperimentConfig::parse(GRID, Path::new("."))
        .unwrap()
        .cells()
        .iter()
        .map(|c| (c.dataset_id.clone(), c.backbone, c.method, c.horizon))
        .collect();
    let reports: Vec<&str> = runs[0]
        .iter()
        .filter(|(n, _)| n.starts_with("reports/"))
        .map(|(n, _)| n.as_str())
        .collect();
    let expected = [
        "reports/table1_be_final_level.csv",
        "reports/table2_bpso_final_mask.csv",
        "reports/table3_be_two_level.csv",
        "reports/table6_performance.csv",
        "reports/figure2_be_cardinality.svg",
        "reports/figure3_bpso_best.svg",
    ];
    let complete = expected.iter().all(|e| reports.contains(e));
    let identical = runs[0] == runs[1];
    let per_run_ok = timings.iter().all(|&t| t <= 20.0 * 60.0);
    outcome(
        identical && complete && cells.len() == 24 && per_run_ok,
        format!(
            "{} configuration cells, {} files per run, byte-identical: {identical}, run times {:.0} s and {:.0} s (limit 1200 s each)",
            cells.len(),
            runs[0].len(),
            timings[0],
            timings[1]
        ),
    )
}

// --------------------------------------------------------------- criterion 10

fn data_invariants() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_levelscope");
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let results: Vec<Result<(), String>> = (0..100)
        .map(|i| {
            let tick = [0.01, 0.05, 0.1, 0.25, 1.0][rng.gen_range(0..5)];
            let base_price = tick * rng.gen_range(100..20_000) as f64;
            let levels: Vec<String> = (1..=10)
                .filter(|_| rng.gen_bool(0.3))
                .map(|l| l.to_string())
                .collect();
            let mut text = format!(
                "days = {}\nevents_per_day = {}\nsignal_strength = {:.3}\nsignal_decay = {:.3}\nbase_price = {base_price}\ntick = {tick}\nmean_run_length = {:.1}\njump_fraction = {:.4}\nsignal_lead = {}\nseed = {}\n",
                rng.gen_range(1..5),
                rng.gen_range(20..400),
                rng.gen_range(0.0..=1.0),
                rng.gen_range(0.1..=1.0),
                rng.gen_range(1.0..60.0),
                rng.gen_range(0.001..0.2),
                rng.gen_range(1..30),
                rng.gen::<u32>()
            );
            if !levels.is_empty() {
                text.push_str(&format!("informative_levels = {}\n", levels.join("|")));
            }
            (i, text)
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, text)| {
            let cfg = dir.path().join(format!("synth{i}.cfg"));
            let data = dir.path().join(format!("events{i}.csv"));
            std::fs::write(&cfg, &text).unwrap();
            let gen = Command::new(exe)
                .args(["gen-data", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&data)
                .output()
                .unwrap();
            if !gen.status.success() {
                return Err(format!(
                    "config {i}: gen-data failed: {}",
                    String::from_utf8_lossy(&gen.stderr)
                ));
            }
            let check = Command::new(exe)
                .args(["validate-data", "--in"])
                .arg(&data)
                .output()
                .unwrap();
            let stdout = String::from_utf8_lossy(&check.stdout);
            if !check.status.success() || !stdout.contains(", 0 violations") {
                return Err(format!("config {i}: {stdout}"));
            }
            Ok(())
        })
        .collect();
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "100 generated files, zero violations".to_string()
        } else {
            failures.join("; ")
        },
    )
}
