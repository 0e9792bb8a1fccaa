use super::{sigmoid, softmax3, ModelParams, CLASSES};
use crate::matrix::Matrix;
use crate::FEATURES;

pub(super) const HIDDEN: usize = 60;

const W1: usize = 0;
const W_TIME: usize = 1;
const W2: usize = 2;
const B1: usize = 3;
const LAMBDA: usize = 4;
const W_OUT: usize = 5;
const B2: usize = 6;

pub(super) fn layout(t: usize) -> Vec<(&'static str, usize, usize, Option<(usize, usize)>)> {
    vec![
        ("w1", HIDDEN, FEATURES, Some((FEATURES, HIDDEN))),
        ("w_time", t, t, Some((t, t))),
        ("w2", t, 1, Some((t, 1))),
        ("b1", HIDDEN, 1, None),
        ("lambda", 1, 1, None),
        ("w_out", CLASSES, HIDDEN, Some((HIDDEN, CLASSES))),
        ("b2", CLASSES, 1, None),
    ]
}

pub(crate) struct Cache {
    t: usize,
    ybar: Vec<f64>,
    attn: Vec<f64>,
    ytil: Vec<f64>,
    z: Vec<f64>,
    lambda: f64,
    // backward scratch
    dytil: Vec<f64>,
    dybar: Vec<f64>,
    de: Vec<f64>,
}

impl Cache {
    pub(super) fn new(t: usize) -> Self {
        let n = HIDDEN * t;
        Self {
            t,
            ybar: vec![0.0; n],
            attn: vec![0.0; n],
            ytil: vec![0.0; n],
            z: vec![0.0; HIDDEN],
            lambda: 0.5,
            dytil: vec![0.0; n],
            dybar: vec![0.0; n],
            de: vec![0.0; n],
        }
    }
}

pub(super) fn forward(p: &ModelParams, x: &Matrix, rows: &[usize], c: &mut Cache) -> [f64; CLASSES] {
    let t = c.t;
    let w1 = p.at(W1);
    let wt = p.at(W_TIME);
    let w2 = p.at(W2);
    let b1 = p.at(B1);
    let wout = p.at(W_OUT);
    let b2 = p.at(B2);
    let lambda = sigmoid(p.at(LAMBDA)[0]);
    c.lambda = lambda;

    // Ȳ = W₁X over the active rows only.
    c.ybar.fill(0.0);
    for i in 0..HIDDEN {
        let yrow = &mut c.ybar[i * t..(i + 1) * t];
        let wrow = &w1[i * FEATURES..(i + 1) * FEATURES];
        for &r in rows {
            let w = wrow[r];
            for (y, &xv) in yrow.iter_mut().zip(x.row(r)) {
                *y += w * xv;
            }
        }
    }

    // A = row softmax of ȲW, Ỹ = λ(Ȳ⊙A) + (1−λ)Ȳ, z = ỸW₂ + b₁.
    for i in 0..HIDDEN {
        let yrow = &c.ybar[i * t..(i + 1) * t];
        let arow = &mut c.attn[i * t..(i + 1) * t];
        for j in 0..t {
            let mut e = 0.0;
            for l in 0..t {
                e += yrow[l] * wt[l * t + j];
            }
            arow[j] = e;
        }
        let m = arow.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for a in arow.iter_mut() {
            *a = (*a - m).exp();
            s += *a;
        }
        for a in arow.iter_mut() {
            *a /= s;
        }
        let mut z = b1[i];
        for j in 0..t {
            let yt = lambda * yrow[j] * arow[j] + (1.0 - lambda) * yrow[j];
            c.ytil[i * t + j] = yt;
            z += yt * w2[j];
        }
        c.z[i] = z;
    }

    let mut logits = [0.0; CLASSES];
    for (k, l) in logits.iter_mut().enumerate() {
        let mut s = b2[k];
        for i in 0..HIDDEN {
            s += wout[k * HIDDEN + i] * c.z[i];
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
    let lambda = c.lambda;
    let wout = p.at(W_OUT);
    let wt = p.at(W_TIME);
    let w2 = p.at(W2);

    {
        let gwout = g.at_mut(W_OUT);
        for k in 0..CLASSES {
            for i in 0..HIDDEN {
                gwout[k * HIDDEN + i] += dlogits[k] * c.z[i];
            }
        }
    }
    for (gb, d) in g.at_mut(B2).iter_mut().zip(dlogits) {
        *gb += d;
    }
    let mut dz = [0.0; HIDDEN];
    for (i, d) in dz.iter_mut().enumerate() {
        *d = (0..CLASSES).map(|k| wout[k * HIDDEN + i] * dlogits[k]).sum();
    }
    for (gb, d) in g.at_mut(B1).iter_mut().zip(&dz) {
        *gb += d;
    }

    let Cache {
        ybar,
        attn,
        ytil,
        z: _,
        dytil,
        dybar,
        de,
        ..
    } = c;

    {
        let gw2 = g.at_mut(W2);
        for i in 0..HIDDEN {
            for j in 0..t {
                gw2[j] += ytil[i * t + j] * dz[i];
                dytil[i * t + j] = dz[i] * w2[j];
            }
        }
    }

    let mut dlam = 0.0;
    for i in 0..HIDDEN {
        let yrow = &ybar[i * t..(i + 1) * t];
        let arow = &attn[i * t..(i + 1) * t];
        let dyt = &dytil[i * t..(i + 1) * t];
        let mut dot = 0.0;
        for j in 0..t {
            dlam += dyt[j] * (yrow[j] * arow[j] - yrow[j]);
            let da = lambda * dyt[j] * yrow[j];
            dybar[i * t + j] = dyt[j] * (lambda * arow[j] + 1.0 - lambda);
            de[i * t + j] = da;
            dot += arow[j] * da;
        }
        for j in 0..t {
            de[i * t + j] = arow[j] * (de[i * t + j] - dot);
        }
    }
    g.at_mut(LAMBDA)[0] += dlam * lambda * (1.0 - lambda);

    // E = ȲW: dW += Ȳᵀ dE, dȲ += dE Wᵀ.
    {
        let gwt = g.at_mut(W_TIME);
        for i in 0..HIDDEN {
            let yrow = &ybar[i * t..(i + 1) * t];
            let derow = &de[i * t..(i + 1) * t];
            for l in 0..t {
                let y = yrow[l];
                let mut acc = 0.0;
                for j in 0..t {
                    gwt[l * t + j] += y * derow[j];
                    acc += derow[j] * wt[l * t + j];
                }
                dybar[i * t + l] += acc;
            }
        }
    }

    let gw1 = g.at_mut(W1);
    for i in 0..HIDDEN {
        let dy = &dybar[i * t..(i + 1) * t];
        for &r in rows {
            let mut acc = 0.0;
            for (d, &xv) in dy.iter().zip(x.row(r)) {
                acc += d * xv;
            }
            gw1[i * FEATURES + r] += acc;
        }
    }
}
