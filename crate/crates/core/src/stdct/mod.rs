//! Linear short-time DCT and the two-layer DCTNet.
//!
//! A frame `m` of channel `k` is `sum_n x(n + m*hop) h(n) cos(pi (n + 1/2) k / N)`. The
//! second layer treats every first-layer channel row as a time series and runs the same
//! transform over it; no rectification happens between layers, so the map from signal to
//! [`LayeredTensor`] is linear and the pooled energy is a quadratic form in the signal.

mod verify;

pub use verify::{gram_oracle_deviation, shift_covariance_deviation, GramOracle};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbanks::{linear_dct_filterbank_scaled, make_window, FilterBank, WindowKind};
use crate::signal_io::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConvMode {
    /// Frames must lie entirely inside the input.
    #[default]
    Valid,
    /// Indices wrap modulo the input length; `ceil(len / hop)` frames.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StdctConfig {
    pub win_len: usize,
    pub hop: usize,
    pub window: WindowKind,
    /// Channels `0..channels` are retained.
    pub channels: usize,
    pub conv_mode: ConvMode,
    /// Orthonormal DCT-II scaling. Feature paths leave this off.
    pub orthonormal: bool,
}

impl StdctConfig {
    pub fn new(win_len: usize, hop: usize, window: WindowKind) -> Self {
        Self {
            win_len,
            hop,
            window,
            channels: win_len,
            conv_mode: ConvMode::Valid,
            orthonormal: false,
        }
    }

    pub fn with_channels(mut self, channels: usize) -> Self {
        self.channels = channels;
        self
    }

    pub fn circular(mut self) -> Self {
        self.conv_mode = ConvMode::Circular;
        self
    }

    pub fn orthonormal(mut self) -> Self {
        self.orthonormal = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.win_len == 0 {
            return Err(Error::arg("window length must be at least 1"));
        }
        if self.hop == 0 || self.hop > self.win_len {
            return Err(Error::arg(format!(
                "hop must be in 1..={}, got {}",
                self.win_len, self.hop
            )));
        }
        if self.channels == 0 || self.channels > self.win_len {
            return Err(Error::arg(format!(
                "channels must be in 1..={}, got {}",
                self.win_len, self.channels
            )));
        }
        Ok(())
    }

    pub fn filterbank(&self) -> Result<FilterBank> {
        self.validate()?;
        let window = make_window(self.window, self.win_len)?;
        let channels: Vec<usize> = (0..self.channels).collect();
        linear_dct_filterbank_scaled(&window, self.win_len, &channels, self.orthonormal)
    }

    pub fn n_frames(&self, input_len: usize) -> Option<usize> {
        match self.conv_mode {
            ConvMode::Valid if input_len < self.win_len => None,
            ConvMode::Valid => Some((input_len - self.win_len) / self.hop + 1),
            ConvMode::Circular if input_len == 0 => None,
            ConvMode::Circular => Some(input_len.div_ceil(self.hop)),
        }
    }
}

/// Prepared single-layer transform.
#[derive(Debug, Clone)]
pub struct ShortTimeDct {
    cfg: StdctConfig,
    bank: FilterBank,
}

impl ShortTimeDct {
    pub fn new(cfg: StdctConfig) -> Result<Self> {
        Ok(Self {
            bank: cfg.filterbank()?,
            cfg,
        })
    }

    pub fn config(&self) -> &StdctConfig {
        &self.cfg
    }

    pub fn transform(&self, x: &[f64]) -> Result<FeatureMatrix> {
        let cfg = &self.cfg;
        let n_frames = cfg.n_frames(x.len()).ok_or_else(|| {
            Error::TooShort(format!(
                "input of {} samples is shorter than the {}-sample window",
                x.len(),
                cfg.win_len
            ))
        })?;
        let k = self.bank.len();
        let mut out = vec![0.0; n_frames * k];
        let mut wrapped = vec![0.0; cfg.win_len];
        for (m, row) in out.chunks_exact_mut(k).enumerate() {
            let start = m * cfg.hop;
            let frame: &[f64] = match cfg.conv_mode {
                ConvMode::Valid => &x[start..start + cfg.win_len],
                ConvMode::Circular => {
                    for (n, w) in wrapped.iter_mut().enumerate() {
                        *w = x[(start + n) % x.len()];
                    }
                    &wrapped
                }
            };
            for (dst, filter) in row.iter_mut().zip(&self.bank.filters) {
                *dst = dot(frame, filter);
            }
        }
        let fm = FeatureMatrix::new(n_frames, k, out, cfg.hop as u32)?;
        fm.with_center_freqs(self.bank.center_freqs.clone())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Single-layer short-time DCT of a signal or any real series.
pub fn short_time_dct(x: &[f64], cfg: &StdctConfig) -> Result<FeatureMatrix> {
    ShortTimeDct::new(*cfg)?.transform(x)
}

/// Pre-pooling two-layer output, indexed `(m, k1, k2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredTensor {
    pub frames: usize,
    pub channels1: usize,
    pub channels2: usize,
    pub data: Vec<f64>,
    /// Input samples per output frame (product of layer hops).
    pub hop: usize,
    /// Center frequencies of the second-layer channels, when known.
    pub channel_freqs: Option<Vec<f64>>,
}

impl LayeredTensor {
    pub fn zeros(frames: usize, channels1: usize, channels2: usize, hop: usize) -> Self {
        Self {
            frames,
            channels1,
            channels2,
            data: vec![0.0; frames * channels1 * channels2],
            hop,
            channel_freqs: None,
        }
    }

    #[inline]
    pub fn index(&self, m: usize, k1: usize, k2: usize) -> usize {
        (m * self.channels1 + k1) * self.channels2 + k2
    }

    #[inline]
    pub fn get(&self, m: usize, k1: usize, k2: usize) -> f64 {
        self.data[self.index(m, k1, k2)]
    }

    pub fn set(&mut self, m: usize, k1: usize, k2: usize, v: f64) {
        let i = self.index(m, k1, k2);
        self.data[i] = v;
    }

    /// Stacks per-row second-layer outputs, where `rows[k1]` has shape `(frames, channels2)`.
    pub(crate) fn stack(rows: &[FeatureMatrix], hop: usize) -> Self {
        let channels1 = rows.len();
        let frames = rows.first().map_or(0, FeatureMatrix::rows);
        let channels2 = rows.first().map_or(0, FeatureMatrix::cols);
        let mut t = Self::zeros(frames, channels1, channels2, hop);
        for (k1, row) in rows.iter().enumerate() {
            for m in 0..frames {
                let dst = t.index(m, k1, 0);
                t.data[dst..dst + channels2].copy_from_slice(row.row(m));
            }
        }
        t.channel_freqs = rows.first().and_then(|r| r.center_freqs.clone());
        t
    }
}

pub(crate) fn layer_err(layer: usize, e: Error) -> Error {
    match e {
        Error::TooShort(msg) => Error::TooShort(format!("layer {layer}: {msg}")),
        Error::Argument(msg) => Error::Argument(format!("layer {layer}: {msg}")),
        other => other,
    }
}

/// Two-layer DCTNet: a short-time DCT, then a short-time DCT of every channel row.
pub fn dctnet_forward(x: &[f64], layer1: &StdctConfig, layer2: &StdctConfig) -> Result<LayeredTensor> {
    let first = ShortTimeDct::new(*layer1).map_err(|e| layer_err(1, e))?;
    let second = ShortTimeDct::new(*layer2).map_err(|e| layer_err(2, e))?;
    let x1 = first.transform(x).map_err(|e| layer_err(1, e))?;
    let rows = (0..x1.cols())
        .into_par_iter()
        .map(|k1| second.transform(&x1.column(k1)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| layer_err(2, e))?;
    Ok(LayeredTensor::stack(&rows, layer1.hop * layer2.hop))
}

/// `F(m, k2) = sum_k1 X(m, k1, k2)^2`.
pub fn pool_energy(t: &LayeredTensor) -> FeatureMatrix {
    let cols = t.channels2.max(1);
    let mut out = vec![0.0; t.frames * cols];
    for m in 0..t.frames {
        let dst = &mut out[m * cols..m * cols + t.channels2];
        for k1 in 0..t.channels1 {
            let base = t.index(m, k1, 0);
            for (acc, v) in dst.iter_mut().zip(&t.data[base..base + t.channels2]) {
                *acc += v * v;
            }
        }
    }
    let fm = FeatureMatrix::new(t.frames, cols, out, t.hop as u32)
        .expect("squares of finite values are finite");
    match &t.channel_freqs {
        Some(f) if f.len() == cols => fm.with_center_freqs(f.clone()).expect("length checked"),
        _ => fm,
    }
}

/// Entrywise `ln(v + eps)`.
pub fn log_compress(fm: &FeatureMatrix, eps: f64) -> Result<FeatureMatrix> {
    if !(eps > 0.0) {
        return Err(Error::arg(format!("eps must be positive, got {eps}")));
    }
    if let Some(v) = fm.data().iter().find(|v| **v < 0.0) {
        return Err(Error::arg(format!("log_compress needs non-negative input, found {v}")));
    }
    let mut out = fm.clone();
    for v in out.data_mut() {
        *v = (*v + eps).ln();
    }
    Ok(out)
}
