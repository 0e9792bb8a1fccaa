use super::{softmax3, ModelParams, CLASSES};
use crate::matrix::Matrix;
use crate::{FEATURES, LEVELS};

pub(super) const CHANNELS: usize = 16;
pub(super) const KERNEL: usize = 5;
const PAD: usize = KERNEL / 2;

const PROJ: usize = 0;
const CONV: usize = 1;
const CONV_BIAS: usize = 2;
const W_OUT: usize = 3;
const B_OUT: usize = 4;

pub(super) fn layout(_t: usize) -> Vec<(&'static str, usize, usize, Option<(usize, usize)>)> {
    vec![
        ("proj", 1, 4, Some((4, 1))),
        (
            "conv",
            CHANNELS,
            LEVELS * KERNEL,
            Some((LEVELS * KERNEL, CHANNELS * KERNEL)),
        ),
        ("conv_bias", CHANNELS, 1, None),
        ("w_out", CLASSES, CHANNELS, Some((CHANNELS, CLASSES))),
        ("b_out", CLASSES, 1, None),
    ]
}

pub(crate) struct Cache {
    t: usize,
    /// Level projections, LEVELS×T.
    h: Vec<f64>,
    /// Pre-activations, CHANNELS×T.
    pre: Vec<f64>,
    pooled: [f64; CHANNELS],
    active: [bool; LEVELS],
    dh: Vec<f64>,
    dpre: Vec<f64>,
}

impl Cache {
    pub(super) fn new(t: usize) -> Self {
        Self {
            t,
            h: vec![0.0; LEVELS * t],
            pre: vec![0.0; CHANNELS * t],
            pooled: [0.0; CHANNELS],
            active: [false; LEVELS],
            dh: vec![0.0; LEVELS * t],
            dpre: vec![0.0; CHANNELS * t],
        }
    }
}

/// Levels with at least one active row. Rows are given in ascending order in
/// whole level blocks by the callers, but a partial block still works: the
/// missing rows just contribute zero.
fn mark_active(rows: &[usize], active: &mut [bool; LEVELS]) {
    active.fill(false);
    for &r in rows {
        active[r / 4] = true;
    }
}

fn row_active(rows: &[usize], r: usize) -> bool {
    rows.binary_search(&r).is_ok()
}

pub(super) fn forward(p: &ModelParams, x: &Matrix, rows: &[usize], c: &mut Cache) -> [f64; CLASSES] {
    let t = c.t;
    let proj = p.at(PROJ);
    let kernel = p.at(CONV);
    let bias = p.at(CONV_BIAS);
    let wout = p.at(W_OUT);
    let bout = p.at(B_OUT);
    mark_active(rows, &mut c.active);
    let full_blocks = rows.len() == FEATURES;

    c.h.fill(0.0);
    for k in 0..LEVELS {
        if !c.active[k] {
            continue;
        }
        let hrow = &mut c.h[k * t..(k + 1) * t];
        for (q, &w) in proj.iter().enumerate() {
            let r = 4 * k + q;
            if !full_blocks && !row_active(rows, r) {
                continue;
            }
            for (h, &xv) in hrow.iter_mut().zip(x.row(r)) {
                *h += w * xv;
            }
        }
    }

    for ch in 0..CHANNELS {
        let krow = &kernel[ch * LEVELS * KERNEL..(ch + 1) * LEVELS * KERNEL];
        let mut pooled = 0.0;
        for j in 0..t {
            let mut s = bias[ch];
            for k in 0..LEVELS {
                if !c.active[k] {
                    continue;
                }
                let hrow = &c.h[k * t..(k + 1) * t];
                for d in 0..KERNEL {
                    // Input column j + d - PAD, zero outside [0, t).
                    let src = j + d;
                    if src < PAD || src - PAD >= t {
                        continue;
                    }
                    s += krow[k * KERNEL + d] * hrow[src - PAD];
                }
            }
            c.pre[ch * t + j] = s;
            pooled += s.max(0.0);
        }
        c.pooled[ch] = pooled / t as f64;
    }

    let mut logits = [0.0; CLASSES];
    for (o, l) in logits.iter_mut().enumerate() {
        let mut s = bout[o];
        for ch in 0..CHANNELS {
            s += wout[o * CHANNELS + ch] * c.pooled[ch];
        }
        *l = s;
    }
    softmax3(logits)
}

pub(super) fn backward(
    p: &ModelParams,
    x: &Matrix,
    rows: &[usize],
    c: &mut Cache,
    dlogits: &[f64; CLASSES],
    g: &mut ModelParams,
) {
    let t = c.t;
    let kernel = p.at(CONV);
    let wout = p.at(W_OUT);
    let full_blocks = rows.len() == FEATURES;

    {
        let gw = g.at_mut(W_OUT);
        for o in 0..CLASSES {
            for ch in 0..CHANNELS {
                gw[o * CHANNELS + ch] += dlogits[o] * c.pooled[ch];
            }
        }
    }
    for (gb, d) in g.at_mut(B_OUT).iter_mut().zip(dlogits) {
        *gb += d;
    }

    for ch in 0..CHANNELS {
        let dpool: f64 = (0..CLASSES).map(|o| wout[o * CHANNELS + ch] * dlogits[o]).sum();
        let scaled = dpool / t as f64;
        for j in 0..t {
            c.dpre[ch * t + j] = if c.pre[ch * t + j] > 0.0 { scaled } else { 0.0 };
        }
    }

    {
        let gbias = g.at_mut(CONV_BIAS);
        for ch in 0..CHANNELS {
            gbias[ch] += c.dpre[ch * t..(ch + 1) * t].iter().sum::<f64>();
        }
    }

    c.dh.fill(0.0);
    {
        let gk = g.at_mut(CONV);
        for ch in 0..CHANNELS {
            let base = ch * LEVELS * KERNEL;
            let dp = &c.dpre[ch * t..(ch + 1) * t];
            for k in 0..LEVELS {
                if !c.active[k] {
                    continue;
                }
                let hrow = &c.h[k * t..(k + 1) * t];
                let dhrow = &mut c.dh[k * t..(k + 1) * t];
                for d in 0..KERNEL {
                    let w = kernel[base + k * KERNEL + d];
                    let mut acc = 0.0;
                    for (j, &dv) in dp.iter().enumerate() {
                        let src = j + d;
                        if src < PAD || src - PAD >= t {
                            continue;
                        }
                        acc += dv * hrow[src - PAD];
                        dhrow[src - PAD] += dv * w;
                    }
                    gk[base + k * KERNEL + d] += acc;
                }
            }
        }
    }

    let gproj = g.at_mut(PROJ);
    for k in 0..LEVELS {
        if !c.active[k] {
            continue;
        }
        let dhrow = &c.dh[k * t..(k + 1) * t];
        for (q, gp) in gproj.iter_mut().enumerate() {
            let r = 4 * k + q;
            if !full_blocks && !row_active(rows, r) {
                continue;
            }
            *gp += dhrow.iter().zip(x.row(r)).map(|(d, xv)| d * xv).sum::<f64>();
        }
    }
}
