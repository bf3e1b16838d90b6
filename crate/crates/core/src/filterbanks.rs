//! Windows, DCT-II bases, windowed-cosine FIR banks and the constant-Q
//! frequency grid.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hamming,
    Hann,
    Rectangular,
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Hamming => "hamming",
            WindowKind::Hann => "hann",
            WindowKind::Rectangular => "rectangular",
        })
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hamming" => Ok(WindowKind::Hamming),
            "hann" | "hanning" => Ok(WindowKind::Hann),
            "rectangular" | "rect" | "boxcar" => Ok(WindowKind::Rectangular),
            other => Err(Error::arg(format!("unknown window kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowVector {
    pub values: Vec<f64>,
    pub kind: WindowKind,
}

impl WindowVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Symmetric window of the given length. A length-1 window is `[1.0]`.
pub fn make_window(kind: WindowKind, length: usize) -> Result<WindowVector> {
    if length == 0 {
        return Err(Error::arg("window length must be at least 1"));
    }
    let values = if length == 1 {
        vec![1.0]
    } else {
        let denom = (length - 1) as f64;
        // evaluate on the mirrored index so values[i] == values[len-1-i] bitwise
        (0..length)
            .map(|n| {
                let n = n.min(length - 1 - n) as f64;
                let c = (2.0 * PI * n / denom).cos();
                match kind {
                    WindowKind::Hamming => 0.54 - 0.46 * c,
                    WindowKind::Hann => 0.5 - 0.5 * c,
                    WindowKind::Rectangular => 1.0,
                }
            })
            .collect()
    };
    Ok(WindowVector { values, kind })
}

/// `cos(pi * (n + 1/2) * k / len)` with the phase reduced exactly in integers.
#[inline]
pub fn dct_cos(n: usize, k: usize, len: usize) -> f64 {
    let period = 4 * len as u128;
    let phase = ((2 * n as u128 + 1) * k as u128) % period;
    (PI * phase as f64 / (2 * len) as f64).cos()
}

/// DCT-II basis; entry `[k][n] = s_k cos(pi (n + 1/2) k / N)`.
///
/// With `orthonormal`, `s_0 = sqrt(1/N)` and `s_k = sqrt(2/N)` otherwise; without it every
/// `s_k = 1`.
pub fn dct2_basis(len: usize, orthonormal: bool) -> Result<Vec<Vec<f64>>> {
    if len == 0 {
        return Err(Error::arg("DCT size must be at least 1"));
    }
    Ok((0..len)
        .map(|k| {
            let s = dct_scale(k, len, orthonormal);
            (0..len).map(|n| s * dct_cos(n, k, len)).collect()
        })
        .collect())
}

#[inline]
pub(crate) fn dct_scale(k: usize, len: usize, orthonormal: bool) -> f64 {
    match (orthonormal, k) {
        (false, _) => 1.0,
        (true, 0) => (1.0 / len as f64).sqrt(),
        (true, _) => (2.0 / len as f64).sqrt(),
    }
}

/// A set of real FIR filters.
///
/// Center frequencies are in Hz for constant-Q banks. Linear DCT banks are built without a
/// sample rate and carry them in cycles per sample (`k / 2N`).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub filters: Vec<Vec<f64>>,
    pub center_freqs: Vec<f64>,
    pub lengths: Vec<usize>,
    pub q_factor: Option<f64>,
}

impl FilterBank {
    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn max_length(&self) -> usize {
        self.lengths.iter().copied().max().unwrap_or(0)
    }
}

/// Windowed DCT-II filters `h(n) cos(pi (n + 1/2) k / N)` for the requested channels.
pub fn linear_dct_filterbank(
    window: &WindowVector,
    len: usize,
    channels: &[usize],
) -> Result<FilterBank> {
    if window.len() != len {
        return Err(Error::arg(format!(
            "window length {} does not match DCT size {len}",
            window.len()
        )));
    }
    linear_dct_filterbank_scaled(window, len, channels, false)
}

pub(crate) fn linear_dct_filterbank_scaled(
    window: &WindowVector,
    len: usize,
    channels: &[usize],
    orthonormal: bool,
) -> Result<FilterBank> {
    if let Some(&k) = channels.iter().find(|&&k| k >= len) {
        return Err(Error::arg(format!("channel {k} out of range for DCT size {len}")));
    }
    let filters = channels
        .iter()
        .map(|&k| {
            let s = dct_scale(k, len, orthonormal);
            window
                .values
                .iter()
                .enumerate()
                .map(|(n, h)| s * h * dct_cos(n, k, len))
                .collect()
        })
        .collect();
    Ok(FilterBank {
        filters,
        center_freqs: channels.iter().map(|&k| k as f64 / (2 * len) as f64).collect(),
        lengths: vec![len; channels.len()],
        q_factor: None,
    })
}

/// Center frequencies `f_k = f0 * 2^(k/b)`, `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub f0: f64,
    pub bins_per_octave: u32,
    pub freqs: Vec<f64>,
}

impl FrequencyGrid {
    /// An arbitrary non-negative, strictly increasing grid. `bins_per_octave` only feeds
    /// the Q factor used for window lengths.
    pub fn custom(freqs: Vec<f64>, bins_per_octave: u32) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::arg("frequency grid is empty"));
        }
        if bins_per_octave == 0 {
            return Err(Error::arg("bins per octave must be at least 1"));
        }
        if freqs.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::arg("grid frequencies must be finite and non-negative"));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("grid frequencies must be strictly increasing"));
        }
        Ok(Self {
            f0: freqs[0],
            bins_per_octave,
            freqs,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn q_factor(&self) -> f64 {
        constant_q(self.bins_per_octave)
    }

    pub fn max_freq(&self) -> f64 {
        *self.freqs.last().expect("grid is non-empty")
    }
}

/// `Q = 1 / (2^(1/b) - 1)`.
pub fn constant_q(bins_per_octave: u32) -> f64 {
    1.0 / (2f64.powf(1.0 / bins_per_octave as f64) - 1.0)
}

/// Geometric grid with `K = floor(b log2(f_max / f0))` bins above `f0`.
pub fn cq_frequency_grid(f0: f64, f_max: f64, bins_per_octave: u32, fs: f64) -> Result<FrequencyGrid> {
    if !(f0 > 0.0 && f0 < f_max) {
        return Err(Error::arg(format!("need 0 < f0 < f_max, got f0={f0}, f_max={f_max}")));
    }
    if f_max > 0.45 * fs {
        return Err(Error::arg(format!(
            "f_max={f_max} Hz exceeds 0.45 * fs = {} Hz",
            0.45 * fs
        )));
    }
    if bins_per_octave == 0 {
        return Err(Error::arg("bins per octave must be at least 1"));
    }
    let b = bins_per_octave as f64;
    // tolerance keeps exact octave ratios (80/40) from flooring one bin short
    let n_bins = (b * (f_max / f0).log2() + 1e-9).floor() as usize;
    let freqs: Vec<f64> = (1..=n_bins)
        .map(|k| f0 * 2f64.powf(k as f64 / b))
        .filter(|&f| f <= f_max * (1.0 + 1e-12))
        .collect();
    if freqs.is_empty() {
        return Err(Error::arg(format!(
            "band {f0}..{f_max} Hz holds no bin at {bins_per_octave} bins per octave"
        )));
    }
    Ok(FrequencyGrid {
        f0,
        bins_per_octave,
        freqs,
    })
}

/// `N_k = round(Q fs / f_k)` clamped to `[min_len, max_len]`.
pub fn cq_window_lengths(
    grid: &FrequencyGrid,
    fs: f64,
    min_len: usize,
    max_len: usize,
) -> Result<Vec<usize>> {
    if min_len == 0 || min_len > max_len {
        return Err(Error::arg(format!(
            "need 1 <= min_len <= max_len, got {min_len}..{max_len}"
        )));
    }
    let q = grid.q_factor();
    Ok(grid
        .freqs
        .iter()
        .map(|&f| {
            let ideal = q * fs / f;
            if ideal.is_finite() {
                (ideal.round() as usize).clamp(min_len, max_len)
            } else {
                max_len
            }
        })
        .collect())
}

/// Constant-Q windowed-cosine bank: filter `k` is `h_k(n) cos(2 pi f_k (n + 1/2) / fs)` with
/// `h_k` the window of length `N_k`.
///
/// With `normalize`, every window is rescaled so its sum equals that of the longest window.
pub fn constant_q_filterbank(
    grid: &FrequencyGrid,
    fs: f64,
    kind: WindowKind,
    min_len: usize,
    max_len: usize,
    normalize: bool,
) -> Result<FilterBank> {
    let lengths = cq_window_lengths(grid, fs, min_len, max_len)?;
    let longest = *lengths.iter().max().expect("grid is non-empty");
    let reference_sum = make_window(kind, longest)?.sum();
    let filters = grid
        .freqs
        .iter()
        .zip(&lengths)
        .map(|(&f, &len)| {
            let window = make_window(kind, len)?;
            let scale = if normalize {
                let s = window.sum();
                if s > 0.0 {
                    reference_sum / s
                } else {
                    1.0
                }
            } else {
                1.0
            };
            let omega = 2.0 * PI * f / fs;
            Ok(window
                .values
                .iter()
                .enumerate()
                .map(|(n, h)| scale * h * (omega * (n as f64 + 0.5)).cos())
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(FilterBank {
        filters,
        center_freqs: grid.freqs.clone(),
        lengths,
        q_factor: Some(grid.q_factor()),
    })
}
