//! Three-class classifiers over masked sample windows.
//!
//! Two small backbones stand in for the attention-bilinear and convolutional
//! model families:
//!
//! * [`BackboneKind::TemporalBilinear`]: `Ȳ = W₁X` (60×T), attention
//!   `A = softmax_rows(ȲW)`, `Ỹ = λ(Ȳ⊙A) + (1−λ)Ȳ` with `λ = σ(ρ)`,
//!   `z = ỸW₂ + b₁`, output `softmax(W_out z + b₂)`.
//! * [`BackboneKind::Convolutional`]: a 4→1 projection shared by all level
//!   blocks (10×T), a width-5 same-padded temporal convolution to 16 ReLU
//!   channels, global average over time, then `softmax(W_out g + b)`.
//!
//! Gradients are derived by hand in each backbone module and checked against
//! central finite differences in the tests.

mod bilinear;
mod codec;
mod conv;
mod metrics;
mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::MovementLabel;
use crate::matrix::Matrix;
use crate::FEATURES;

pub use codec::{decode_params, encode_params, load_params, save_params, MAGIC};
pub use metrics::{evaluate, F1Report};
pub use train::{train, train_windows, EpochRecord, TrainConfig, TrainingTrace};

/// Floor applied to the true-class probability inside the log loss.
pub const PROB_FLOOR: f64 = 1e-12;

pub const CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BackboneKind {
    TemporalBilinear,
    Convolutional,
}

impl BackboneKind {
    pub const ALL: [BackboneKind; 2] = [Self::TemporalBilinear, Self::Convolutional];

    pub fn tag(self) -> &'static str {
        match self {
            Self::TemporalBilinear => "bilinear",
            Self::Convolutional => "conv",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "bilinear" | "temporal_bilinear" | "tabl" => Ok(Self::TemporalBilinear),
            "conv" | "convolutional" | "deeplob" => Ok(Self::Convolutional),
            other => Err(Error::arg(format!("unknown backbone '{other}'"))),
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Self::TemporalBilinear => 0,
            Self::Convolutional => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::TemporalBilinear),
            1 => Some(Self::Convolutional),
            _ => None,
        }
    }

    /// `(name, rows, cols, fan)` per tensor; `fan` is `Some((in, out))` for
    /// weights drawn at initialization and `None` for zero-initialized ones.
    fn layout(self, t: usize) -> Vec<(&'static str, usize, usize, Option<(usize, usize)>)> {
        match self {
            Self::TemporalBilinear => bilinear::layout(t),
            Self::Convolutional => conv::layout(t),
        }
    }
}

impl std::fmt::Display for BackboneKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub value: Matrix,
}

/// Weights of one backbone instance. Gradients use the same type and layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: BackboneKind,
    pub window_length: usize,
    pub seed: u64,
    tensors: Vec<NamedTensor>,
}

impl ModelParams {
    pub fn tensors(&self) -> &[NamedTensor] {
        &self.tensors
    }

    pub fn tensor(&self, name: &str) -> Option<&Matrix> {
        self.tensors.iter().find(|t| t.name == name).map(|t| &t.value)
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.tensors
            .iter_mut()
            .find(|t| t.name == name)
            .map(|t| &mut t.value)
    }

    #[inline]
    pub(crate) fn at(&self, idx: usize) -> &[f64] {
        self.tensors[idx].value.as_slice()
    }

    #[inline]
    pub(crate) fn at_mut(&mut self, idx: usize) -> &mut [f64] {
        self.tensors[idx].value.as_mut_slice()
    }

    pub fn zeros_like(&self) -> ModelParams {
        ModelParams {
            kind: self.kind,
            window_length: self.window_length,
            seed: self.seed,
            tensors: self
                .tensors
                .iter()
                .map(|t| NamedTensor {
                    name: t.name.clone(),
                    value: Matrix::zeros(t.value.rows(), t.value.cols()),
                })
                .collect(),
        }
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(|t| t.value.as_slice().len()).sum()
    }

    /// All values in tensor order.
    pub fn flat(&self) -> Vec<f64> {
        self.tensors
            .iter()
            .flat_map(|t| t.value.as_slice().iter().copied())
            .collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_values() {
            return Err(Error::arg("flat parameter vector has the wrong length"));
        }
        let mut offset = 0;
        for t in &mut self.tensors {
            let n = t.value.as_slice().len();
            t.value
                .as_mut_slice()
                .copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub(crate) fn add_scaled(&mut self, alpha: f64, other: &ModelParams) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.value.as_mut_slice().iter_mut().zip(b.value.as_slice()) {
                *x += alpha * y;
            }
        }
    }

    pub(crate) fn fill_zero(&mut self) {
        for t in &mut self.tensors {
            t.value.as_mut_slice().fill(0.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.value.is_finite())
    }

    pub(crate) fn from_parts(
        kind: BackboneKind,
        window_length: usize,
        seed: u64,
        tensors: Vec<NamedTensor>,
    ) -> Result<Self> {
        let layout = kind.layout(window_length);
        if layout.len() != tensors.len() {
            return Err(Error::Format(format!(
                "{kind} expects {} tensors, found {}",
                layout.len(),
                tensors.len()
            )));
        }
        for ((name, rows, cols, _), t) in layout.iter().zip(&tensors) {
            if *name != t.name || t.value.shape() != (*rows, *cols) {
                return Err(Error::Format(format!(
                    "tensor '{}' {}x{} does not match expected '{name}' {rows}x{cols}",
                    t.name,
                    t.value.rows(),
                    t.value.cols()
                )));
            }
        }
        Ok(Self {
            kind,
            window_length,
            seed,
            tensors,
        })
    }
}

/// Glorot-uniform weights from `seed`, zero biases, attention mix λ = 0.5.
pub fn init_params(kind: BackboneKind, window_length: usize, seed: u64) -> Result<ModelParams> {
    if window_length == 0 {
        return Err(Error::arg("window length T must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors = kind
        .layout(window_length)
        .into_iter()
        .map(|(name, rows, cols, fan)| {
            let value = match fan {
                Some((fan_in, fan_out)) => {
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-limit..limit))
                }
                None => Matrix::zeros(rows, cols),
            };
            NamedTensor {
                name: name.to_string(),
                value,
            }
        })
        .collect();
    Ok(ModelParams {
        kind,
        window_length,
        seed,
        tensors,
    })
}

/// Per-sample intermediate buffers, reused across samples.
pub(crate) enum Workspace {
    Bilinear(bilinear::Cache),
    Conv(conv::Cache),
}

impl Workspace {
    pub(crate) fn new(kind: BackboneKind, t: usize) -> Self {
        match kind {
            BackboneKind::TemporalBilinear => Workspace::Bilinear(bilinear::Cache::new(t)),
            BackboneKind::Convolutional => Workspace::Conv(conv::Cache::new(t)),
        }
    }
}

/// Forward pass reading only `rows` of `x`; every other row is treated as zero.
pub(crate) fn forward_rows(
    params: &ModelParams,
    x: &Matrix,
    rows: &[usize],
    ws: &mut Workspace,
) -> [f64; CLASSES] {
    match ws {
        Workspace::Bilinear(c) => bilinear::forward(params, x, rows, c),
        Workspace::Conv(c) => conv::forward(params, x, rows, c),
    }
}

/// Accumulates the gradient of the loss with respect to the parameters into
/// `grad`, given `dlogits` for the sample last passed through `forward_rows`.
pub(crate) fn backward_rows(
    params: &ModelParams,
    x: &Matrix,
    rows: &[usize],
    ws: &mut Workspace,
    dlogits: &[f64; CLASSES],
    grad: &mut ModelParams,
) {
    match ws {
        Workspace::Bilinear(c) => bilinear::backward(params, x, rows, c, dlogits, grad),
        Workspace::Conv(c) => conv::backward(params, x, rows, c, dlogits, grad),
    }
}

fn check_input(params: &ModelParams, x: &Matrix) -> Result<()> {
    if x.shape() != (FEATURES, params.window_length) {
        return Err(Error::Evaluation(format!(
            "input is {}x{}, model expects {FEATURES}x{}",
            x.rows(),
            x.cols(),
            params.window_length
        )));
    }
    if !x.is_finite() {
        return Err(Error::Evaluation("input contains non-finite values".into()));
    }
    Ok(())
}

/// Class probabilities (Up, Down, Stationary) for an already-masked input.
pub fn forward(params: &ModelParams, x: &Matrix) -> Result<[f64; CLASSES]> {
    check_input(params, x)?;
    let rows: Vec<usize> = (0..FEATURES).collect();
    let mut ws = Workspace::new(params.kind, params.window_length);
    Ok(forward_rows(params, x, &rows, &mut ws))
}

/// Most probable class; ties go to the lower class index.
pub fn predict(params: &ModelParams, x: &Matrix) -> Result<MovementLabel> {
    Ok(argmax_label(&forward(params, x)?))
}

pub(crate) fn argmax_label(p: &[f64; CLASSES]) -> MovementLabel {
    let mut best = 0;
    for c in 1..CLASSES {
        if p[c] > p[best] {
            best = c;
        }
    }
    MovementLabel::from_index(best).expect("class index")
}

/// Floored negative log-likelihood of `label` and its gradient with respect
/// to the logits, scaled by `scale`.
pub(crate) fn nll_and_dlogits(
    probs: &[f64; CLASSES],
    label: MovementLabel,
    scale: f64,
) -> (f64, [f64; CLASSES]) {
    let y = label.index();
    let py = probs[y];
    if py < PROB_FLOOR {
        // The floored log is constant here.
        return (-PROB_FLOOR.ln(), [0.0; CLASSES]);
    }
    let mut d = [0.0; CLASSES];
    for c in 0..CLASSES {
        d[c] = scale * (probs[c] - if c == y { 1.0 } else { 0.0 });
    }
    (-py.ln(), d)
}

/// Mean cross-entropy over the batch and its exact gradient.
pub fn loss_and_gradient(
    params: &ModelParams,
    batch: &[(Matrix, MovementLabel)],
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::arg("loss of an empty batch"));
    }
    let rows: Vec<usize> = (0..FEATURES).collect();
    let mut ws = Workspace::new(params.kind, params.window_length);
    let mut grad = params.zeros_like();
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for (x, label) in batch {
        check_input(params, x)?;
        let probs = forward_rows(params, x, &rows, &mut ws);
        let (l, d) = nll_and_dlogits(&probs, *label, scale);
        loss += l;
        backward_rows(params, x, &rows, &mut ws, &d, &mut grad);
    }
    Ok((loss * scale, grad))
}

#[inline]
pub(crate) fn softmax3(logits: [f64; CLASSES]) -> [f64; CLASSES] {
    let m = logits[0].max(logits[1]).max(logits[2]);
    let e = [
        (logits[0] - m).exp(),
        (logits[1] - m).exp(),
        (logits[2] - m).exp(),
    ];
    let s = e[0] + e[1] + e[2];
    [e[0] / s, e[1] / s, e[2] / s]
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests;
