//! Single-hidden-layer tanh RNN with a softmax readout on the last hidden state.
//!
//! Training runs full backpropagation through time per chunk with global-norm gradient
//! clipping and plain SGD. All matrices are row-major `Vec<f64>`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::FeatureMatrix;

pub const INIT_RANGE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct RnnModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub n_classes: usize,
    /// `hidden x input_dim`.
    pub w_in: Vec<f64>,
    /// `hidden x hidden`.
    pub w_rec: Vec<f64>,
    pub b_h: Vec<f64>,
    /// `n_classes x hidden`.
    pub v: Vec<f64>,
    pub b_y: Vec<f64>,
}

/// Gradients, laid out like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnGrads {
    pub w_in: Vec<f64>,
    pub w_rec: Vec<f64>,
    pub b_h: Vec<f64>,
    pub v: Vec<f64>,
    pub b_y: Vec<f64>,
}

impl RnnGrads {
    fn zeros(m: &RnnModel) -> Self {
        Self {
            w_in: vec![0.0; m.w_in.len()],
            w_rec: vec![0.0; m.w_rec.len()],
            b_h: vec![0.0; m.b_h.len()],
            v: vec![0.0; m.v.len()],
            b_y: vec![0.0; m.b_y.len()],
        }
    }

    fn blocks(&self) -> [&Vec<f64>; 5] {
        [&self.w_in, &self.w_rec, &self.b_h, &self.v, &self.b_y]
    }

    fn blocks_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [&mut self.w_in, &mut self.w_rec, &mut self.b_h, &mut self.v, &mut self.b_y]
    }

    pub fn norm(&self) -> f64 {
        self.blocks().iter().flat_map(|b| b.iter()).map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Flattened in parameter order.
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.iter().copied()).collect()
    }
}

impl RnnModel {
    pub fn n_params(&self) -> usize {
        self.w_in.len() + self.w_rec.len() + self.b_h.len() + self.v.len() + self.b_y.len()
    }

    fn blocks_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [&mut self.w_in, &mut self.w_rec, &mut self.b_h, &mut self.v, &mut self.b_y]
    }

    pub fn blocks(&self) -> [&Vec<f64>; 5] {
        [&self.w_in, &self.w_rec, &self.b_h, &self.v, &self.b_y]
    }

    fn param_mut(&mut self, mut idx: usize) -> &mut f64 {
        for b in self.blocks_mut() {
            if idx < b.len() {
                return &mut b[idx];
            }
            idx -= b.len();
        }
        panic!("parameter index out of range")
    }

    fn check_seq(&self, seq: &FeatureMatrix) -> Result<()> {
        if seq.rows() == 0 {
            return Err(Error::arg("RNN input sequence is empty"));
        }
        if seq.cols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: seq.cols(),
            });
        }
        Ok(())
    }

    /// Hidden states `h_1..h_T` concatenated row-major.
    fn hidden_states(&self, seq: &FeatureMatrix) -> Vec<f64> {
        let (h, d) = (self.hidden, self.input_dim);
        let t_len = seq.rows();
        let mut states = vec![0.0; t_len * h];
        let zero = vec![0.0; h];
        for t in 0..t_len {
            let x = seq.row(t);
            let (done, rest) = states.split_at_mut(t * h);
            let prev = if t == 0 { &zero[..] } else { &done[(t - 1) * h..] };
            let cur = &mut rest[..h];
            for i in 0..h {
                let wi = &self.w_in[i * d..(i + 1) * d];
                let wr = &self.w_rec[i * h..(i + 1) * h];
                let a = dot(wi, x) + dot(wr, prev) + self.b_h[i];
                cur[i] = a.tanh();
            }
        }
        states
    }

    fn logits(&self, h_last: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| dot(&self.v[c * self.hidden..(c + 1) * self.hidden], h_last) + self.b_y[c])
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Orthogonal recurrent matrix from the QR factor of a seeded Gaussian matrix; the
/// remaining weights are uniform in `[-0.01, 0.01]` and biases are zero.
pub fn rnn_init(input_dim: usize, hidden: usize, n_classes: usize, seed: u64) -> Result<RnnModel> {
    if input_dim == 0 || hidden == 0 || n_classes == 0 {
        return Err(Error::arg("RNN dimensions must all be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(hidden, hidden, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // sign fix so Q does not depend on the QR implementation's sign convention
    for j in 0..hidden {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let w_rec: Vec<f64> = (0..hidden * hidden).map(|k| q[(k / hidden, k % hidden)]).collect();
    let w_in = (0..hidden * input_dim).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
    let v = (0..n_classes * hidden).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect();
    Ok(RnnModel {
        input_dim,
        hidden,
        n_classes,
        w_in,
        w_rec,
        b_h: vec![0.0; hidden],
        v,
        b_y: vec![0.0; n_classes],
    })
}

/// Class probabilities for one sequence.
pub fn rnn_forward(model: &RnnModel, seq: &FeatureMatrix) -> Result<Vec<f64>> {
    model.check_seq(seq)?;
    let states = model.hidden_states(seq);
    let h = model.hidden;
    let last = &states[states.len() - h..];
    Ok(softmax(&model.logits(last)))
}

/// Cross-entropy loss of one labelled sequence and its exact gradient.
pub fn rnn_loss_and_grad(model: &RnnModel, seq: &FeatureMatrix, label: usize) -> Result<(f64, RnnGrads)> {
    model.check_seq(seq)?;
    if label >= model.n_classes {
        return Err(Error::arg(format!("label {label} out of range for {} classes", model.n_classes)));
    }
    let (h, d) = (model.hidden, model.input_dim);
    let t_len = seq.rows();
    let states = model.hidden_states(seq);
    let last = &states[(t_len - 1) * h..];
    let p = softmax(&model.logits(last));
    let loss = -p[label].ln();

    let mut g = RnnGrads::zeros(model);
    let mut dlogit = p;
    dlogit[label] -= 1.0;
    let mut dh = vec![0.0; h];
    for c in 0..model.n_classes {
        g.b_y[c] = dlogit[c];
        let vrow = &model.v[c * h..(c + 1) * h];
        for i in 0..h {
            g.v[c * h + i] = dlogit[c] * last[i];
            dh[i] += vrow[i] * dlogit[c];
        }
    }
    let mut da = vec![0.0; h];
    for t in (0..t_len).rev() {
        let ht = &states[t * h..(t + 1) * h];
        for i in 0..h {
            da[i] = dh[i] * (1.0 - ht[i] * ht[i]);
        }
        let x = seq.row(t);
        for i in 0..h {
            let a = da[i];
            g.b_h[i] += a;
            for (gw, xv) in g.w_in[i * d..(i + 1) * d].iter_mut().zip(x) {
                *gw += a * xv;
            }
            if t > 0 {
                let prev = &states[(t - 1) * h..t * h];
                for (gw, hv) in g.w_rec[i * h..(i + 1) * h].iter_mut().zip(prev) {
                    *gw += a * hv;
                }
            }
        }
        dh.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..h {
            let row = &model.w_rec[i * h..(i + 1) * h];
            for j in 0..h {
                dh[j] += row[j] * da[i];
            }
        }
    }
    Ok((loss, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RnnTrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub clip: f64,
    pub seed: u64,
}

impl Default for RnnTrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            epochs: 100,
            clip: 5.0,
            seed: 0,
        }
    }
}

/// Mean cross-entropy over a labelled set.
pub fn mean_loss(model: &RnnModel, chunks: &[FeatureMatrix], labels: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for (c, &y) in chunks.iter().zip(labels) {
        let p = rnn_forward(model, c)?;
        total -= p[y].ln();
    }
    Ok(total / chunks.len() as f64)
}

/// Trains in place and returns the mean training loss at initialization followed by the
/// mean training loss after every epoch.
pub fn rnn_train(
    model: &mut RnnModel,
    chunks: &[FeatureMatrix],
    labels: &[usize],
    cfg: &RnnTrainConfig,
) -> Result<Vec<f64>> {
    if chunks.is_empty() || chunks.len() != labels.len() {
        return Err(Error::arg(format!(
            "need matching non-empty chunks and labels, got {} and {}",
            chunks.len(),
            labels.len()
        )));
    }
    if !(cfg.lr >= 0.0) || !(cfg.clip > 0.0) {
        return Err(Error::arg("lr must be non-negative and clip positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..chunks.len()).collect();
    let mut history = vec![mean_loss(model, chunks, labels)?];
    if !history[0].is_finite() {
        return Err(Error::Numeric(format!("non-finite loss {} at initialization", history[0])));
    }
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (loss, mut g) = rnn_loss_and_grad(model, &chunks[i], labels[i])?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss {loss} at epoch {epoch}, chunk {i}")));
            }
            let norm = g.norm();
            if !norm.is_finite() {
                return Err(Error::Numeric(format!("non-finite gradient at epoch {epoch}, chunk {i}")));
            }
            if norm > cfg.clip {
                let s = cfg.clip / norm;
                g.blocks_mut().into_iter().flat_map(|b| b.iter_mut()).for_each(|v| *v *= s);
            }
            for (p, gb) in model.blocks_mut().into_iter().zip(g.blocks()) {
                for (w, gv) in p.iter_mut().zip(gb.iter()) {
                    *w -= cfg.lr * gv;
                }
            }
        }
        let l = mean_loss(model, chunks, labels)?;
        if !l.is_finite() {
            return Err(Error::Numeric(format!("non-finite mean loss after epoch {epoch}")));
        }
        history.push(l);
    }
    Ok(history)
}

/// Gradient-check result per parameter block plus the overall worst case.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

pub const GRAD_CHECK_STEP: f64 = 1e-5;

/// Compares every analytic gradient entry with a central finite difference.
pub fn rnn_gradient_check_detailed(model: &RnnModel, chunk: &FeatureMatrix, label: usize) -> Result<GradCheck> {
    let (_, g) = rnn_loss_and_grad(model, chunk, label)?;
    let analytic = g.flatten();
    let loss_at = |m: &RnnModel| -> Result<f64> { Ok(-rnn_forward(m, chunk)?[label].ln()) };
    let mut probe = model.clone();
    let mut numeric = Vec::with_capacity(analytic.len());
    let mut worst: f64 = 0.0;
    for (k, &ga) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(k);
        *probe.param_mut(k) = orig + GRAD_CHECK_STEP;
        let up = loss_at(&probe)?;
        *probe.param_mut(k) = orig - GRAD_CHECK_STEP;
        let down = loss_at(&probe)?;
        *probe.param_mut(k) = orig;
        let gn = (up - down) / (2.0 * GRAD_CHECK_STEP);
        numeric.push(gn);
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(GradCheck {
        max_rel_error: worst,
        analytic,
        numeric,
    })
}

pub fn rnn_gradient_check(model: &RnnModel, chunk: &FeatureMatrix, label: usize) -> Result<f64> {
    Ok(rnn_gradient_check_detailed(model, chunk, label)?.max_rel_error)
}
