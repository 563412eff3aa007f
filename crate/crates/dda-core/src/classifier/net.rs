//! Forward pass and exact backward pass for both classifier kinds.
//!
//! Everything runs on flat `f64` buffers with explicit index arithmetic;
//! gradients are accumulated per sample in layout order so results are
//! independent of any batching strategy.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::ImageTensor;

use super::{
    Arch, ClassifierKind, ModelParams, CONV1_FILTERS, CONV2_FILTERS, HIDDEN, KERNEL,
};

fn check_input(arch: &Arch, img: &ImageTensor) -> Result<()> {
    let got = img.geometry();
    let expected = (arch.height, arch.width, arch.channels);
    if got != expected {
        return Err(Error::GeometryMismatch { expected, got });
    }
    Ok(())
}

/// z[o][y][x] = b[o] + Σ_{i,p,q} in[i][y+p][x+q]·w[o][i][p][q], valid range.
fn conv_forward(
    input: &[f64],
    (ci, hi, wi): (usize, usize, usize),
    w: &[f64],
    b: &[f64],
    co: usize,
) -> Vec<f64> {
    let (ho, wo) = (hi - KERNEL + 1, wi - KERNEL + 1);
    let mut out = vec![0.0; co * ho * wo];
    for o in 0..co {
        for y in 0..ho {
            for x in 0..wo {
                let mut acc = b[o];
                for i in 0..ci {
                    let wbase = ((o * ci + i) * KERNEL) * KERNEL;
                    let ibase = i * hi * wi;
                    for p in 0..KERNEL {
                        let irow = ibase + (y + p) * wi + x;
                        let wrow = wbase + p * KERNEL;
                        for q in 0..KERNEL {
                            acc += input[irow + q] * w[wrow + q];
                        }
                    }
                }
                out[(o * ho + y) * wo + x] = acc;
            }
        }
    }
    out
}

fn conv_backward(
    input: &[f64],
    (ci, hi, wi): (usize, usize, usize),
    w: &[f64],
    co: usize,
    dz: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    din: &mut [f64],
) {
    let (ho, wo) = (hi - KERNEL + 1, wi - KERNEL + 1);
    for o in 0..co {
        for y in 0..ho {
            for x in 0..wo {
                let g = dz[(o * ho + y) * wo + x];
                if g == 0.0 {
                    continue;
                }
                db[o] += g;
                for i in 0..ci {
                    let wbase = ((o * ci + i) * KERNEL) * KERNEL;
                    let ibase = i * hi * wi;
                    for p in 0..KERNEL {
                        let irow = ibase + (y + p) * wi + x;
                        let wrow = wbase + p * KERNEL;
                        for q in 0..KERNEL {
                            dw[wrow + q] += g * input[irow + q];
                            din[irow + q] += g * w[wrow + q];
                        }
                    }
                }
            }
        }
    }
}

/// 2×2 max pooling, stride 2; returns the pooled map and the argmax index of
/// every window (ties resolve to the first in row-major order).
fn maxpool_forward(input: &[f64], (c, h, w): (usize, usize, usize)) -> (Vec<f64>, Vec<usize>) {
    let (ho, wo) = (h / 2, w / 2);
    let mut out = vec![0.0; c * ho * wo];
    let mut arg = vec![0usize; c * ho * wo];
    for ch in 0..c {
        for y in 0..ho {
            for x in 0..wo {
                let mut best_idx = (ch * h + 2 * y) * w + 2 * x;
                let mut best = input[best_idx];
                for (dy, dx) in [(0usize, 1usize), (1, 0), (1, 1)] {
                    let idx = (ch * h + 2 * y + dy) * w + 2 * x + dx;
                    if input[idx] > best {
                        best = input[idx];
                        best_idx = idx;
                    }
                }
                let o = (ch * ho + y) * wo + x;
                out[o] = best;
                arg[o] = best_idx;
            }
        }
    }
    (out, arg)
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn dense_forward(input: &[f64], w: &[f64], b: &[f64], out_dim: usize) -> Vec<f64> {
    let in_dim = input.len();
    let mut out = Vec::with_capacity(out_dim);
    for o in 0..out_dim {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let mut acc = b[o];
        for (x, wv) in input.iter().zip(row) {
            acc += x * wv;
        }
        out.push(acc);
    }
    out
}

fn dense_backward(
    input: &[f64],
    w: &[f64],
    dz: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    din: &mut [f64],
) {
    let in_dim = input.len();
    for (o, &g) in dz.iter().enumerate() {
        db[o] += g;
        let row = o * in_dim;
        for i in 0..in_dim {
            dw[row + i] += g * input[i];
            din[i] += g * w[row + i];
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Per-sample activations kept for the backward pass of the convnet.
struct CnnTrace {
    input: Vec<f64>,
    arg1: Vec<usize>,
    r1: Vec<f64>,
    p1: Vec<f64>,
    arg2: Vec<usize>,
    r2: Vec<f64>,
    p2: Vec<f64>,
    z3: Vec<f64>,
    r3: Vec<f64>,
    probs: Vec<f64>,
}

struct LogisticTrace {
    input: Vec<f64>,
    probs: Vec<f64>,
}

enum Trace {
    Cnn(CnnTrace),
    Logistic(LogisticTrace),
}

fn forward_single(m: &ModelParams, img: &ImageTensor) -> Result<Trace> {
    check_input(&m.arch, img)?;
    let specs = m.arch.tensor_specs();
    let input = img.flatten();
    match m.arch.kind {
        ClassifierKind::Logistic => {
            let logits = dense_forward(&input, m.tensor(&specs[0]), m.tensor(&specs[1]), m.arch.classes);
            let probs = softmax(&logits);
            Ok(Trace::Logistic(LogisticTrace { input, probs }))
        }
        ClassifierKind::TinyCnn => {
            let d = m.arch.cnn_dims();
            let c0 = m.arch.channels;
            let z1 = conv_forward(
                &input,
                (c0, m.arch.height, m.arch.width),
                m.tensor(&specs[0]),
                m.tensor(&specs[1]),
                CONV1_FILTERS,
            );
            let (p1, arg1) = maxpool_forward(&z1, (CONV1_FILTERS, d.h1, d.w1));
            let mut r1 = p1.clone();
            relu(&mut r1);
            let z2 = conv_forward(
                &r1,
                (CONV1_FILTERS, d.hp1, d.wp1),
                m.tensor(&specs[2]),
                m.tensor(&specs[3]),
                CONV2_FILTERS,
            );
            let (p2, arg2) = maxpool_forward(&z2, (CONV2_FILTERS, d.h2, d.w2));
            let mut r2 = p2.clone();
            relu(&mut r2);
            let z3 = dense_forward(&r2, m.tensor(&specs[4]), m.tensor(&specs[5]), HIDDEN);
            let mut r3 = z3.clone();
            relu(&mut r3);
            let logits = dense_forward(&r3, m.tensor(&specs[6]), m.tensor(&specs[7]), m.arch.classes);
            let probs = softmax(&logits);
            Ok(Trace::Cnn(CnnTrace {
                input,
                arg1,
                r1,
                p1,
                arg2,
                r2,
                p2,
                z3,
                r3,
                probs,
            }))
        }
    }
}

fn trace_probs(trace: &Trace) -> &[f64] {
    match trace {
        Trace::Cnn(t) => &t.probs,
        Trace::Logistic(t) => &t.probs,
    }
}

/// Class-probability rows for a batch; each row is a softmax output.
pub fn forward(m: &ModelParams, batch: &[&ImageTensor]) -> Result<Vec<Vec<f64>>> {
    batch
        .iter()
        .map(|img| forward_single(m, img).map(|t| trace_probs(&t).to_vec()))
        .collect()
}

/// Mean cross-entropy over the batch plus the exact gradient in parameter
/// layout order; also reports how many argmax predictions were correct.
pub fn loss_and_grad(
    m: &ModelParams,
    batch: &[&ImageTensor],
    labels: &[u8],
) -> Result<(f64, usize, Vec<f64>)> {
    if batch.len() != labels.len() {
        return Err(Error::BadLength {
            expected: batch.len(),
            got: labels.len(),
        });
    }
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (i, &label) in labels.iter().enumerate() {
        if label as usize >= m.arch.classes {
            return Err(Error::LabelOutOfRange { index: i, label });
        }
    }
    let specs = m.arch.tensor_specs();
    let mut grad = vec![0.0f64; m.arch.param_len()];
    let mut loss = 0.0;
    let mut correct = 0;
    let scale = 1.0 / batch.len() as f64;
    for (img, &label) in batch.iter().zip(labels) {
        let trace = forward_single(m, img)?;
        let probs = trace_probs(&trace);
        loss -= scale * libm::log(probs[label as usize].max(f64::MIN_POSITIVE));
        if argmax(probs) == label as usize {
            correct += 1;
        }
        // d(mean CE)/dlogits = (p − onehot)/B
        let mut dlogits: Vec<f64> = probs.iter().map(|&p| p * scale).collect();
        dlogits[label as usize] -= scale;
        backward_single(m, &specs, &trace, &dlogits, &mut grad);
    }
    Ok((loss, correct, grad))
}

/// Index of the largest entry; ties resolve to the lowest index.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

// Tensor gradients live at the same offsets as the tensors themselves, so
// weight/bias pairs are carved out of the flat gradient with split_at_mut at
// the bias offset.
fn backward_single(
    m: &ModelParams,
    specs: &[super::TensorSpec],
    trace: &Trace,
    dlogits: &[f64],
    grad: &mut [f64],
) {
    match trace {
        Trace::Logistic(t) => {
            let mut din = vec![0.0; t.input.len()];
            let (gw, rest) = grad.split_at_mut(specs[1].offset);
            dense_backward(&t.input, m.tensor(&specs[0]), dlogits, gw, rest, &mut din);
        }
        Trace::Cnn(t) => {
            let d = m.arch.cnn_dims();
            let c0 = m.arch.channels;

            let mut dr3 = vec![0.0; HIDDEN];
            {
                // fc2
                let (head, tail) = grad.split_at_mut(specs[7].offset);
                let gw = &mut head[specs[6].offset..specs[6].offset + specs[6].len()];
                dense_backward(&t.r3, m.tensor(&specs[6]), dlogits, gw, tail, &mut dr3);
            }
            let dz3: Vec<f64> = dr3
                .iter()
                .zip(&t.z3)
                .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                .collect();
            let mut dr2 = vec![0.0; d.flat];
            {
                // fc1
                let (head, tail) = grad.split_at_mut(specs[5].offset);
                let gw = &mut head[specs[4].offset..specs[4].offset + specs[4].len()];
                let gb = &mut tail[..specs[5].len()];
                dense_backward(&t.r2, m.tensor(&specs[4]), &dz3, gw, gb, &mut dr2);
            }
            // ReLU then unpool back into conv2 pre-activations.
            let mut dz2 = vec![0.0; CONV2_FILTERS * d.h2 * d.w2];
            for (i, &g) in dr2.iter().enumerate() {
                if t.p2[i] > 0.0 {
                    dz2[t.arg2[i]] += g;
                }
            }
            let mut dr1 = vec![0.0; CONV1_FILTERS * d.hp1 * d.wp1];
            {
                // conv2
                let (head, tail) = grad.split_at_mut(specs[3].offset);
                let gw = &mut head[specs[2].offset..specs[2].offset + specs[2].len()];
                let gb = &mut tail[..specs[3].len()];
                conv_backward(
                    &t.r1,
                    (CONV1_FILTERS, d.hp1, d.wp1),
                    m.tensor(&specs[2]),
                    CONV2_FILTERS,
                    &dz2,
                    gw,
                    gb,
                    &mut dr1,
                );
            }
            let mut dz1 = vec![0.0; CONV1_FILTERS * d.h1 * d.w1];
            for (i, &g) in dr1.iter().enumerate() {
                if t.p1[i] > 0.0 {
                    dz1[t.arg1[i]] += g;
                }
            }
            {
                // conv1
                let (head, tail) = grad.split_at_mut(specs[1].offset);
                let gw = &mut head[specs[0].offset..specs[0].offset + specs[0].len()];
                let gb = &mut tail[..specs[1].len()];
                let mut din = vec![0.0; t.input.len()];
                conv_backward(
                    &t.input,
                    (c0, m.arch.height, m.arch.width),
                    m.tensor(&specs[0]),
                    CONV1_FILTERS,
                    &dz1,
                    gw,
                    gb,
                    &mut din,
                );
            }
        }
    }
}
