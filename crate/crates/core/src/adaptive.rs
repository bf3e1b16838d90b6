//! Adaptive short-time DCT with geometrically spaced center frequencies, and the
//! two-layer A-DCTNet feature built on it.
//!
//! Channel `k` at frame `m` is `sum_n x(start_k(m) + n) h_k(n) cos(2 pi f_k (n + 1/2) / fs)`
//! where `h_k` has the constant-Q length `N_k`. All channels of a frame are centered on
//! the same instant: `start_k(m) = m * hop + (L - N_k) / 2` with `L` the longest filter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbanks::{constant_q_filterbank, cq_frequency_grid, FilterBank, FrequencyGrid, WindowKind};
use crate::signal_io::FeatureMatrix;
use crate::stdct::{dot, layer_err, pool_energy, LayeredTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct AdctConfig {
    pub grid: FrequencyGrid,
    pub window: WindowKind,
    pub hop: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Sample rate of the series this layer consumes, Hz.
    pub fs: f64,
    /// Rescale each window so all windows share the longest window's sum.
    pub normalize: bool,
}

impl AdctConfig {
    pub fn new(grid: FrequencyGrid, fs: f64, hop: usize) -> Self {
        Self {
            grid,
            window: WindowKind::Hamming,
            hop,
            min_len: 8,
            max_len: 4096,
            fs,
            normalize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) {
            return Err(Error::arg(format!("sample rate must be positive, got {}", self.fs)));
        }
        if self.hop == 0 {
            return Err(Error::arg("hop must be at least 1"));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::arg(format!(
                "need 1 <= min_len <= max_len, got {}..{}",
                self.min_len, self.max_len
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::arg("frequency grid is empty"));
        }
        let nyquist = self.fs / 2.0;
        if self.grid.max_freq() >= nyquist {
            return Err(Error::arg(format!(
                "grid reaches {} Hz, at or above half the sample rate ({nyquist} Hz)",
                self.grid.max_freq()
            )));
        }
        Ok(())
    }
}

/// Prepared adaptive transform: bank plus per-channel frame offsets.
#[derive(Debug, Clone)]
pub struct AdaptiveStdct {
    cfg: AdctConfig,
    bank: FilterBank,
    offsets: Vec<usize>,
    span: usize,
}

impl AdaptiveStdct {
    pub fn new(cfg: AdctConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = constant_q_filterbank(
            &cfg.grid,
            cfg.fs,
            cfg.window,
            cfg.min_len,
            cfg.max_len,
            cfg.normalize,
        )?;
        let span = bank.max_length();
        let offsets = bank.lengths.iter().map(|&n| (span - n) / 2).collect();
        Ok(Self {
            cfg,
            bank,
            offsets,
            span,
        })
    }

    pub fn config(&self) -> &AdctConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    /// Minimum input length for one frame.
    pub fn span(&self) -> usize {
        self.span
    }

    pub fn n_frames(&self, input_len: usize) -> Option<usize> {
        (input_len >= self.span).then(|| (input_len - self.span) / self.cfg.hop + 1)
    }

    pub fn transform(&self, x: &[f64]) -> Result<FeatureMatrix> {
        let n_frames = self.n_frames(x.len()).ok_or_else(|| {
            Error::TooShort(format!(
                "adaptive transform needs at least {} samples, got {}",
                self.span,
                x.len()
            ))
        })?;
        let k = self.bank.len();
        let mut out = vec![0.0; n_frames * k];
        for (m, row) in out.chunks_exact_mut(k).enumerate() {
            let base = m * self.cfg.hop;
            for ((dst, filter), &off) in row.iter_mut().zip(&self.bank.filters).zip(&self.offsets) {
                let start = base + off;
                *dst = dot(&x[start..start + filter.len()], filter);
            }
        }
        FeatureMatrix::new(n_frames, k, out, self.cfg.hop as u32)?
            .with_center_freqs(self.cfg.grid.freqs.clone())
    }
}

pub fn adaptive_stdct(x: &[f64], cfg: &AdctConfig) -> Result<FeatureMatrix> {
    AdaptiveStdct::new(cfg.clone())?.transform(x)
}

fn check_layer2(layer1: &AdctConfig, layer2: &AdctConfig) -> Result<()> {
    let row_rate = layer1.fs / layer1.hop as f64;
    if layer2.grid.max_freq() >= row_rate / 2.0 {
        return Err(Error::arg(format!(
            "layer-2 grid reaches {:.3} Hz but first-layer rows are sampled at {:.3} Hz \
             (fs / hop1); lower the layer-2 f_max below {:.3} Hz or reduce hop1",
            layer2.grid.max_freq(),
            row_rate,
            row_rate / 2.0
        )));
    }
    if (layer2.fs - row_rate).abs() > 1e-9 * row_rate {
        return Err(Error::arg(format!(
            "layer-2 sample rate {} Hz must equal fs / hop1 = {row_rate} Hz",
            layer2.fs
        )));
    }
    Ok(())
}

/// Pre-pooling A-DCTNet output `X(m, k1, k2)`.
pub fn adctnet_forward(x: &[f64], layer1: &AdctConfig, layer2: &AdctConfig) -> Result<LayeredTensor> {
    check_layer2(layer1, layer2)?;
    let first = AdaptiveStdct::new(layer1.clone())?;
    let second = AdaptiveStdct::new(layer2.clone())?;
    let x1 = first.transform(x).map_err(|e| layer_err(1, e))?;
    let rows = (0..x1.cols())
        .into_par_iter()
        .map(|k1| second.transform(&x1.column(k1)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| layer_err(2, e))?;
    Ok(LayeredTensor::stack(&rows, layer1.hop * layer2.hop))
}

/// Two-layer A-DCTNet energy `F(m, k2)`; columns carry the layer-2 center frequencies.
pub fn adctnet_two_layer(x: &[f64], layer1: &AdctConfig, layer2: &AdctConfig) -> Result<FeatureMatrix> {
    Ok(pool_energy(&adctnet_forward(x, layer1, layer2)?))
}

/// Band and resolution settings for both A-DCTNet layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdctNetParams {
    pub fmin: f64,
    pub fmax: f64,
    /// Lower band edge of layer 2; `fmin` when unset.
    pub fmin2: Option<f64>,
    pub b1: u32,
    pub b2: u32,
    pub hop1: usize,
    pub hop2: usize,
    pub window: WindowKind,
    pub min_len: usize,
    pub max_len1: usize,
    pub max_len2: usize,
    pub normalize: bool,
}

impl Default for AdctNetParams {
    fn default() -> Self {
        Self {
            fmin: 40.0,
            fmax: 5500.0,
            fmin2: None,
            b1: 12,
            b2: 6,
            hop1: 128,
            hop2: 16,
            window: WindowKind::Hamming,
            min_len: 8,
            max_len1: 4096,
            max_len2: 64,
            normalize: true,
        }
    }
}

impl AdctNetParams {
    /// Layer configs for input at `fs`. Each layer's `f_max` is clamped to 0.45 of that
    /// layer's sample rate; layer 2 runs at `fs / hop1`.
    pub fn layer_configs(&self, fs: f64) -> Result<(AdctConfig, AdctConfig)> {
        if self.hop1 == 0 || self.hop2 == 0 {
            return Err(Error::arg("hops must be at least 1"));
        }
        let fmax1 = self.fmax.min(0.45 * fs);
        let grid1 = cq_frequency_grid(self.fmin, fmax1, self.b1, fs)
            .map_err(|e| Error::arg(format!("layer 1: {e}")))?;
        let fs2 = fs / self.hop1 as f64;
        let fmin2 = self.fmin2.unwrap_or(self.fmin);
        let fmax2 = self.fmax.min(0.45 * fs2);
        if fmin2 >= fmax2 {
            return Err(Error::arg(format!(
                "layer 2 runs at fs/hop1 = {fs2:.3} Hz, so its band tops out at {fmax2:.3} Hz, \
                 not above its lower edge {fmin2} Hz; lower fmin2 or hop1"
            )));
        }
        let grid2 = cq_frequency_grid(fmin2, fmax2, self.b2, fs2)
            .map_err(|e| Error::arg(format!("layer 2: {e}")))?;
        let layer = |grid, fs, hop, max_len| AdctConfig {
            grid,
            window: self.window,
            hop,
            min_len: self.min_len,
            max_len,
            fs,
            normalize: self.normalize,
        };
        Ok((
            layer(grid1, fs, self.hop1, self.max_len1),
            layer(grid2, fs2, self.hop2, self.max_len2),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(f: f64, fs: f64, len: usize) -> Vec<f64> {
        (0..len).map(|n| (2.0 * PI * f * n as f64 / fs).sin()).collect()
    }

    #[test]
    fn zero_input_zero_output() {
        let grid = cq_frequency_grid(100.0, 3000.0, 6, 16000.0).unwrap();
        let cfg = AdctConfig::new(grid, 16000.0, 64);
        let fm = adaptive_stdct(&vec![0.0; 8000], &cfg).unwrap();
        assert!(fm.data().iter().all(|v| *v == 0.0));
        assert_eq!(fm.center_freqs.as_deref(), Some(&cfg.grid.freqs[..]));
    }

    #[test]
    fn band_40_to_5500_has_85_columns() {
        let grid = cq_frequency_grid(40.0, 5500.0, 12, 44100.0).unwrap();
        let cfg = AdctConfig::new(grid, 44100.0, 1024);
        let fm = adaptive_stdct(&tone(440.0, 44100.0, 8192), &cfg).unwrap();
        assert_eq!(fm.cols(), 85);
    }

    #[test]
    fn too_short_names_length() {
        let grid = cq_frequency_grid(100.0, 3000.0, 6, 16000.0).unwrap();
        let mut cfg = AdctConfig::new(grid, 16000.0, 64);
        cfg.max_len = 300;
        let err = adaptive_stdct(&[0.0; 100], &cfg).unwrap_err();
        assert!(err.to_string().contains("300"), "{err}");
    }

    #[test]
    fn frames_are_center_aligned() {
        let grid = cq_frequency_grid(200.0, 3000.0, 2, 16000.0).unwrap();
        let cfg = AdctConfig::new(grid, 16000.0, 50);
        let a = AdaptiveStdct::new(cfg).unwrap();
        let span = a.span();
        for (off, len) in a.offsets.iter().zip(&a.bank().lengths) {
            let center2 = 2 * off + len;
            assert!(center2.abs_diff(span) <= 1);
        }
    }

    #[test]
    fn rejects_grid_above_nyquist() {
        let grid = FrequencyGrid::custom(vec![100.0, 9000.0], 4).unwrap();
        assert!(adaptive_stdct(&[0.0; 4096], &AdctConfig::new(grid, 16000.0, 4)).is_err());
    }

    #[test]
    fn layer2_band_must_fit_row_rate() {
        let fs = 8000.0;
        let g1 = cq_frequency_grid(100.0, 3000.0, 3, fs).unwrap();
        let l1 = AdctConfig::new(g1, fs, 32);
        let g2 = FrequencyGrid::custom(vec![10.0, 200.0], 3).unwrap();
        let l2 = AdctConfig::new(g2, fs / 32.0, 4);
        let err = adctnet_two_layer(&vec![0.0; 16000], &l1, &l2).unwrap_err();
        assert!(err.to_string().contains("hop1"), "{err}");
        let g2 = FrequencyGrid::custom(vec![10.0, 100.0], 3).unwrap();
        let l2 = AdctConfig::new(g2, fs, 4);
        assert!(adctnet_two_layer(&vec![0.0; 16000], &l1, &l2).is_err());
    }

    #[test]
    fn default_params_clamp_layer2() {
        let (l1, l2) = AdctNetParams::default().layer_configs(44100.0).unwrap();
        assert_eq!(l1.grid.len(), 85);
        assert!((l2.fs - 44100.0 / 128.0).abs() < 1e-12);
        assert!(l2.grid.max_freq() <= 0.45 * l2.fs);
        let x = tone(300.0, 44100.0, 44100);
        let f = adctnet_two_layer(&x, &l1, &l2).unwrap();
        assert_eq!(f.cols(), l2.grid.len());
        assert!(f.data().iter().all(|v| *v >= 0.0));
        assert_eq!(f.frame_hop, 128 * 16);
    }

    #[test]
    fn two_layer_zero_signal() {
        let (l1, l2) = AdctNetParams::default().layer_configs(44100.0).unwrap();
        let f = adctnet_two_layer(&vec![0.0; 30000], &l1, &l2).unwrap();
        assert!(f.rows() > 0);
        assert!(f.data().iter().all(|v| *v == 0.0));
    }
}
