use serde::{Deserialize, Serialize};

use super::{argmax_label, forward_rows, ModelParams, Workspace, CLASSES};
use crate::error::{Error, Result};
use crate::lob::{MovementLabel, SampleWindow};
use crate::masking::LevelMask;
use crate::FEATURES;

/// Per-class precision, recall and F1 (class order Up, Down, Stationary) and
/// their unweighted mean. `confusion[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub precision: [f64; CLASSES],
    pub recall: [f64; CLASSES],
    pub f1: [f64; CLASSES],
    pub macro_f1: f64,
    pub confusion: [[u64; CLASSES]; CLASSES],
}

impl F1Report {
    pub fn from_confusion(confusion: [[u64; CLASSES]; CLASSES]) -> Self {
        let mut precision = [0.0; CLASSES];
        let mut recall = [0.0; CLASSES];
        let mut f1 = [0.0; CLASSES];
        for c in 0..CLASSES {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = (0..CLASSES).map(|r| confusion[r][c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            precision[c] = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            recall[c] = if actual == 0 { 0.0 } else { tp / actual as f64 };
            let denom = precision[c] + recall[c];
            f1[c] = if denom == 0.0 {
                0.0
            } else {
                2.0 * precision[c] * recall[c] / denom
            };
        }
        let macro_f1 = f1.iter().sum::<f64>() / CLASSES as f64;
        Self {
            precision,
            recall,
            f1,
            macro_f1,
            confusion,
        }
    }

    pub fn from_predictions(labels: &[MovementLabel], predictions: &[MovementLabel]) -> Result<Self> {
        if labels.len() != predictions.len() {
            return Err(Error::arg("labels and predictions differ in length"));
        }
        if labels.is_empty() {
            return Err(Error::arg("F1 of an empty set"));
        }
        let mut confusion = [[0u64; CLASSES]; CLASSES];
        for (y, p) in labels.iter().zip(predictions) {
            confusion[y.index()][p.index()] += 1;
        }
        Ok(Self::from_confusion(confusion))
    }

    pub fn support(&self) -> [u64; CLASSES] {
        std::array::from_fn(|c| self.confusion[c].iter().sum())
    }
}

pub(crate) fn predictions(
    params: &ModelParams,
    windows: &[SampleWindow],
    mask: LevelMask,
) -> Result<Vec<MovementLabel>> {
    let rows = mask.rows();
    let mut ws = Workspace::new(params.kind, params.window_length);
    windows
        .iter()
        .map(|w| {
            if w.matrix.shape() != (FEATURES, params.window_length) {
                return Err(Error::Evaluation(format!(
                    "window is {}x{}, model expects {FEATURES}x{}",
                    w.matrix.rows(),
                    w.matrix.cols(),
                    params.window_length
                )));
            }
            Ok(argmax_label(&forward_rows(params, &w.matrix, &rows, &mut ws)))
        })
        .collect()
}

/// Macro-F1 of argmax predictions on `windows` masked by `mask`.
pub fn evaluate(params: &ModelParams, windows: &[SampleWindow], mask: LevelMask) -> Result<F1Report> {
    if windows.is_empty() {
        return Err(Error::arg("cannot evaluate on an empty window list"));
    }
    let preds = predictions(params, windows, mask)?;
    let labels: Vec<MovementLabel> = windows.iter().map(|w| w.label).collect();
    F1Report::from_predictions(&labels, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use MovementLabel::*;

    #[test]
    fn perfect_predictions() {
        let labels = [Up, Down, Stationary, Up, Stationary];
        let r = F1Report::from_predictions(&labels, &labels).unwrap();
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn all_up_on_balanced_thirty() {
        let labels: Vec<_> = (0..30).map(|i| MovementLabel::ALL[i % 3]).collect();
        let preds = vec![Up; 30];
        let r = F1Report::from_predictions(&labels, &preds).unwrap();
        assert!((r.precision[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.recall[0], 1.0);
        assert!((r.f1[0] - 0.5).abs() < 1e-15);
        assert_eq!(r.f1[1], 0.0);
        assert_eq!(r.f1[2], 0.0);
        assert!((r.macro_f1 - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.support(), [10, 10, 10]);
    }

    #[test]
    fn relabeling_both_sides_keeps_macro() {
        let labels = [Up, Up, Down, Stationary, Down, Stationary, Up];
        let preds = [Up, Down, Down, Up, Stationary, Stationary, Up];
        let swap = |l: &MovementLabel| match l {
            Up => Stationary,
            Down => Up,
            Stationary => Down,
        };
        let a = F1Report::from_predictions(&labels, &preds).unwrap();
        let l2: Vec<_> = labels.iter().map(swap).collect();
        let p2: Vec<_> = preds.iter().map(swap).collect();
        let b = F1Report::from_predictions(&l2, &p2).unwrap();
        assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
    }

    #[test]
    fn empty_rejected() {
        assert!(F1Report::from_predictions(&[], &[]).is_err());
    }
}
