//! Trains both backbones on a synthetic book with planted informative levels
//! and compares the full book against each single level.
//!
//! Usage:
//! `cargo run --release --example planted_level [stride] [epochs] [lr] [batch] [levels] [strength] [decay] [seed]`
//! where `levels` is a list such as `1|2|3`.

use std::time::Instant;

use levelscope::lob::{split_dataset, SplitConfig};
use levelscope::predictor::{evaluate, train};
use levelscope::synth::{generate, SynthConfig};
use levelscope::{BackboneKind, LevelMask, TrainConfig};

fn main() -> levelscope::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let stride: usize = arg(0, "1").parse().unwrap();
    let epochs: usize = arg(1, "10").parse().unwrap();
    let lr: f64 = arg(2, "0.01").parse().unwrap();
    let batch: usize = arg(3, "64").parse().unwrap();
    let levels: Vec<usize> = arg(4, "1").split('|').map(|l| l.parse().unwrap()).collect();
    let strength: f64 = arg(5, "0.9").parse().unwrap();
    let decay: f64 = arg(6, "1").parse().unwrap();
    let seed: u64 = arg(7, "0").parse().unwrap();

    let events = generate(&SynthConfig {
        informative_levels: LevelMask::from_levels(levels)?,
        signal_strength: strength,
        signal_decay: decay,
        seed,
        ..SynthConfig::default()
    })?;
    let mut split = SplitConfig::new(10, 10, 0.002);
    split.window.stride = stride;
    let dataset = split_dataset(&events, &split)?;
    println!(
        "windows: train {} validation {} test {}",
        dataset.train.len(),
        dataset.validation.len(),
        dataset.test.len()
    );
    let config = TrainConfig {
        max_epochs: epochs,
        learning_rate: lr,
        batch_size: batch,
        seed,
        ..TrainConfig::default()
    };
    let mut masks = vec![LevelMask::ALL];
    masks.extend((1..=5).map(|l| LevelMask::single(l).unwrap()));
    for kind in BackboneKind::ALL {
        for &mask in &masks {
            let start = Instant::now();
            let (params, trace) = train(&dataset, mask, kind, &config)?;
            let f1 = evaluate(&params, &dataset.test, mask)?.macro_f1;
            println!(
                "{:>8} {mask} epochs {:>2} validation {:.3} test {f1:.3} ({:.2}s)",
                kind.tag(),
                trace.epochs.len(),
                trace.best_validation_f1().unwrap_or(f64::NAN),
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
