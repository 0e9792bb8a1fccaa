use super::*;
use crate::lob::{MovementLabel, SampleWindow};
use crate::masking::{apply_mask, mask_matrix, LevelMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_input(rng: &mut ChaCha8Rng, t: usize) -> Matrix {
    Matrix::from_fn(FEATURES, t, |_, _| rng.gen_range(-2.0..2.0))
}

fn random_label(rng: &mut ChaCha8Rng) -> MovementLabel {
    MovementLabel::ALL[rng.gen_range(0..3)]
}

/// Perturbs the parameters so that biases and λ are not sitting at their
/// special initial values.
fn jittered(kind: BackboneKind, t: usize, seed: u64) -> ModelParams {
    let mut p = init_params(kind, t, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 77);
    let mut flat = p.flat();
    for v in &mut flat {
        *v += rng.gen_range(-0.1..0.1);
    }
    p.set_flat(&flat).unwrap();
    p
}

fn batch_loss(p: &ModelParams, batch: &[(Matrix, MovementLabel)]) -> f64 {
    batch
        .iter()
        .map(|(x, y)| -forward(p, x).unwrap()[y.index()].max(PROB_FLOOR).ln())
        .sum::<f64>()
        / batch.len() as f64
}

/// Central differences with step 1e-5; relative error uses a 1e-6 floor in
/// the denominator so that entries which are zero on both sides compare
/// absolutely.
fn max_relative_error(kind: BackboneKind, t: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = jittered(kind, t, seed);
    let batch: Vec<_> = (0..3)
        .map(|_| (random_input(&mut rng, t), random_label(&mut rng)))
        .collect();
    let (_, grad) = loss_and_gradient(&params, &batch).unwrap();
    let analytic = grad.flat();
    let base = params.flat();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = params.clone();
    for i in 0..base.len() {
        let mut v = base.clone();
        v[i] = base[i] + h;
        probe.set_flat(&v).unwrap();
        let up = batch_loss(&probe, &batch);
        v[i] = base[i] - h;
        probe.set_flat(&v).unwrap();
        let down = batch_loss(&probe, &batch);
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

#[test]
fn init_is_deterministic() {
    for kind in BackboneKind::ALL {
        assert_eq!(init_params(kind, 10, 3).unwrap(), init_params(kind, 10, 3).unwrap());
        assert_ne!(init_params(kind, 10, 3).unwrap(), init_params(kind, 10, 4).unwrap());
    }
}

#[test]
fn bilinear_shapes() {
    let p = init_params(BackboneKind::TemporalBilinear, 10, 0).unwrap();
    let shape = |n: &str| p.tensor(n).unwrap().shape();
    assert_eq!(shape("w1"), (60, 40));
    assert_eq!(shape("w_time"), (10, 10));
    assert_eq!(shape("w2"), (10, 1));
    assert_eq!(shape("w_out"), (3, 60));
    assert_eq!(shape("b1"), (60, 1));
    assert_eq!(shape("b2"), (3, 1));
    assert_eq!(sigmoid(p.tensor("lambda").unwrap().get(0, 0)), 0.5);
    assert!(p.tensor("b1").unwrap().as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn glorot_bounds_respected() {
    let p = init_params(BackboneKind::TemporalBilinear, 10, 9).unwrap();
    let limit = (6.0f64 / 100.0).sqrt();
    assert!(p.tensor("w1").unwrap().as_slice().iter().all(|v| v.abs() < limit));
}

#[test]
fn zero_length_rejected() {
    assert!(init_params(BackboneKind::Convolutional, 0, 1).is_err());
}

#[test]
fn probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in BackboneKind::ALL {
        for seed in 0..10 {
            let p = jittered(kind, 7, seed);
            let probs = forward(&p, &random_input(&mut rng, 7)).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|&v| v >= PROB_FLOOR && v <= 1.0));
        }
    }
}

#[test]
fn zero_output_layer_gives_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (kind, w, b) in [
        (BackboneKind::TemporalBilinear, "w_out", "b2"),
        (BackboneKind::Convolutional, "w_out", "b_out"),
    ] {
        let mut p = init_params(kind, 6, 2).unwrap();
        p.tensor_mut(w).unwrap().as_mut_slice().fill(0.0);
        p.tensor_mut(b).unwrap().as_mut_slice().fill(0.0);
        let probs = forward(&p, &random_input(&mut rng, 6)).unwrap();
        assert_eq!(probs, [1.0 / 3.0; 3]);
    }
}

#[test]
fn full_mask_is_transparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for kind in BackboneKind::ALL {
        let p = jittered(kind, 5, 1);
        let x = random_input(&mut rng, 5);
        let masked = apply_mask(&x, &mask_matrix(LevelMask::ALL, 5).unwrap()).unwrap();
        assert_eq!(forward(&p, &x).unwrap(), forward(&p, &masked).unwrap());
    }
}

#[test]
fn excluded_levels_cannot_leak() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in BackboneKind::ALL {
        for bits in [0b1u16, 0b101, 0b1111100000, 0b0100010010] {
            let s = LevelMask::from_bits(bits).unwrap();
            let m = mask_matrix(s, 5).unwrap();
            let p = jittered(kind, 5, bits as u64);
            let x = random_input(&mut rng, 5);
            let mut y = x.clone();
            for r in 0..FEATURES {
                if !s.contains(r / 4 + 1) {
                    for v in y.row_mut(r) {
                        *v += rng.gen_range(-100.0..100.0);
                    }
                }
            }
            let a = forward(&p, &apply_mask(&x, &m).unwrap()).unwrap();
            let b = forward(&p, &apply_mask(&y, &m).unwrap()).unwrap();
            assert_eq!(a, b);
            // The row-skipping path used in training agrees with masking.
            let mut ws = Workspace::new(kind, 5);
            let c = forward_rows(&p, &y, &s.rows(), &mut ws);
            for k in 0..3 {
                assert!((a[k] - c[k]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn non_finite_input_rejected() {
    let p = init_params(BackboneKind::Convolutional, 4, 0).unwrap();
    let mut x = Matrix::zeros(40, 4);
    x.set(3, 2, f64::NAN);
    assert!(matches!(forward(&p, &x), Err(Error::Evaluation(_))));
    assert!(forward(&p, &Matrix::zeros(40, 5)).is_err());
}

#[test]
fn uniform_prediction_loss_is_ln3() {
    let mut p = init_params(BackboneKind::TemporalBilinear, 4, 0).unwrap();
    p.tensor_mut("w_out").unwrap().as_mut_slice().fill(0.0);
    let batch = vec![(Matrix::zeros(40, 4), MovementLabel::Down)];
    let (loss, _) = loss_and_gradient(&p, &batch).unwrap();
    assert!((loss - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn confident_prediction_loss_vanishes() {
    let mut p = init_params(BackboneKind::Convolutional, 4, 0).unwrap();
    p.tensor_mut("w_out").unwrap().as_mut_slice().fill(0.0);
    let b = p.tensor_mut("b_out").unwrap();
    b.set(0, 0, 40.0);
    let (loss, _) = loss_and_gradient(&p, &[(Matrix::zeros(40, 4), MovementLabel::Up)]).unwrap();
    assert!(loss < 1e-15);
}

#[test]
fn empty_batch_rejected() {
    let p = init_params(BackboneKind::Convolutional, 4, 0).unwrap();
    assert!(loss_and_gradient(&p, &[]).is_err());
}

#[test]
fn gradients_match_finite_differences() {
    for kind in BackboneKind::ALL {
        for seed in 0..3 {
            let err = max_relative_error(kind, 5, seed);
            assert!(err <= 1e-4, "{kind} seed {seed}: relative error {err}");
        }
    }
}

#[test]
fn codec_round_trips() {
    for kind in BackboneKind::ALL {
        let p = jittered(kind, 6, 11);
        let bytes = encode_params(&p);
        assert_eq!(&bytes[..9], b"LVLSCOPE1");
        assert_eq!(decode_params(&bytes).unwrap(), p);
        assert!(decode_params(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_params(&bad).is_err());
    }
}

fn toy_windows(n: usize, seed: u64) -> Vec<SampleWindow> {
    // Level 1 bid volume minus ask volume in the last column decides the label.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let label = MovementLabel::ALL[rng.gen_range(0..3)];
            let signal = match label {
                MovementLabel::Up => 1.0,
                MovementLabel::Down => -1.0,
                MovementLabel::Stationary => 0.0,
            };
            let matrix = Matrix::from_fn(FEATURES, 4, |r, _| {
                let noise = rng.gen_range(-0.3..0.3);
                match r {
                    1 => -signal + noise,
                    3 => signal + noise,
                    _ => noise,
                }
            });
            SampleWindow {
                matrix,
                label,
                day_index: 0,
                time_index: 0,
            }
        })
        .collect()
}

#[test]
fn zero_epochs_returns_initial_params() {
    let train = toy_windows(20, 1);
    let cfg = TrainConfig {
        max_epochs: 0,
        ..TrainConfig::default()
    };
    for kind in BackboneKind::ALL {
        let (p, trace) = train::train_windows(&train, &train, 4, LevelMask::ALL, kind, &cfg).unwrap();
        assert_eq!(p, init_params(kind, 4, cfg.seed).unwrap());
        assert!(trace.epochs.is_empty());
        assert_eq!(trace.best_epoch, None);
    }
}

#[test]
fn training_is_deterministic_and_learns() {
    let train = toy_windows(600, 2);
    let val = toy_windows(200, 3);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        batch_size: 32,
        max_epochs: 15,
        early_stop_patience: 5,
        seed: 4,
    };
    for kind in BackboneKind::ALL {
        let a = train::train_windows(&train, &val, 4, LevelMask::ALL, kind, &cfg).unwrap();
        let b = train::train_windows(&train, &val, 4, LevelMask::ALL, kind, &cfg).unwrap();
        assert_eq!(a, b);
        let (params, trace) = a;
        assert!(trace.epochs.last().unwrap().loss < trace.initial_loss);
        let f1 = evaluate(&params, &val, LevelMask::ALL).unwrap().macro_f1;
        assert!(f1 > 0.9, "{kind}: {f1}");
        assert_eq!(Some(f1), trace.best_validation_f1());
        // Without level 1 there is nothing to learn.
        let (blind, _) =
            train::train_windows(&train, &val, 4, LevelMask::ALL.without(1), kind, &cfg).unwrap();
        let f1_blind = evaluate(&blind, &val, LevelMask::ALL.without(1)).unwrap().macro_f1;
        assert!(f1_blind < 0.6, "{kind}: {f1_blind}");
    }
}

#[test]
fn empty_training_set_rejected() {
    let cfg = TrainConfig::default();
    assert!(train::train_windows(&[], &[], 4, LevelMask::ALL, BackboneKind::Convolutional, &cfg).is_err());
}

#[test]
fn evaluate_rejects_empty() {
    let p = init_params(BackboneKind::Convolutional, 4, 0).unwrap();
    assert!(evaluate(&p, &[], LevelMask::ALL).is_err());
}
