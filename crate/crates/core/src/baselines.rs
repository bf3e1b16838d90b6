//! Spectrogram filterbank baselines: MFSC (mel), LFSC (linear) and ERB-rate features.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbanks::{make_window, WindowKind};
use crate::signal_io::FeatureMatrix;
use crate::stdct::log_compress;

pub const LOG_FLOOR: f64 = 1e-10;

/// One-sided power spectrogram, `win_len / 2 + 1` columns.
pub fn power_spectrogram(
    x: &[f64],
    fs: f64,
    win_len: usize,
    hop: usize,
    window: WindowKind,
) -> Result<FeatureMatrix> {
    if win_len < 2 || hop == 0 {
        return Err(Error::arg(format!(
            "spectrogram needs win_len >= 2 and hop >= 1, got {win_len}/{hop}"
        )));
    }
    if x.len() < win_len {
        return Err(Error::TooShort(format!(
            "spectrogram needs at least {win_len} samples, got {}",
            x.len()
        )));
    }
    let w = make_window(window, win_len)?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(win_len);
    let n_frames = (x.len() - win_len) / hop + 1;
    let n_bins = win_len / 2 + 1;
    let mut out = Vec::with_capacity(n_frames * n_bins);
    let mut buf = vec![Complex::new(0.0, 0.0); win_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for m in 0..n_frames {
        let frame = &x[m * hop..m * hop + win_len];
        for ((b, s), h) in buf.iter_mut().zip(frame).zip(&w.values) {
            *b = Complex::new(s * h, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        out.extend(buf[..n_bins].iter().map(|c| c.norm_sqr()));
    }
    let freqs = (0..n_bins).map(|j| j as f64 * fs / win_len as f64).collect();
    FeatureMatrix::new(n_frames, n_bins, out, hop as u32)?.with_center_freqs(freqs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterScale {
    Mel,
    Linear,
    Erb,
}

impl FilterScale {
    pub fn warp(self, hz: f64) -> f64 {
        match self {
            FilterScale::Mel => 2595.0 * (1.0 + hz / 700.0).log10(),
            FilterScale::Linear => hz,
            FilterScale::Erb => 21.4 * (1.0 + 0.00437 * hz).log10(),
        }
    }

    pub fn unwarp(self, w: f64) -> f64 {
        match self {
            FilterScale::Mel => 700.0 * (10f64.powf(w / 2595.0) - 1.0),
            FilterScale::Linear => w,
            FilterScale::Erb => (10f64.powf(w / 21.4) - 1.0) / 0.00437,
        }
    }
}

impl fmt::Display for FilterScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterScale::Mel => "mel",
            FilterScale::Linear => "linear",
            FilterScale::Erb => "erb",
        })
    }
}

impl FromStr for FilterScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mel" => Ok(FilterScale::Mel),
            "linear" => Ok(FilterScale::Linear),
            "erb" => Ok(FilterScale::Erb),
            other => Err(Error::arg(format!("unknown filter scale `{other}`"))),
        }
    }
}

/// Triangular filters over spectrogram bins.
#[derive(Debug, Clone, PartialEq)]
pub struct TriFilterBank {
    /// `n_filters x n_bins`, row-major.
    pub weights: Vec<Vec<f64>>,
    pub scale: FilterScale,
    pub band: (f64, f64),
    /// Peak frequency of each filter, Hz.
    pub centers: Vec<f64>,
}

impl TriFilterBank {
    /// Wraps explicit weights; rows must be non-negative with at least one positive entry.
    pub fn from_weights(
        weights: Vec<Vec<f64>>,
        scale: FilterScale,
        band: (f64, f64),
        centers: Vec<f64>,
    ) -> Result<Self> {
        let n_bins = weights.first().map_or(0, Vec::len);
        if weights.is_empty() || n_bins == 0 {
            return Err(Error::arg("filterbank needs at least one filter and one bin"));
        }
        if centers.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: centers.len(),
            });
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n_bins {
                return Err(Error::DimensionMismatch {
                    expected: n_bins,
                    got: row.len(),
                });
            }
            if row.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                return Err(Error::arg(format!("filter {i} has a negative or non-finite weight")));
            }
            if !row.iter().any(|w| *w > 0.0) {
                return Err(Error::arg(format!("filter {i} has no positive weight")));
            }
        }
        Ok(Self {
            weights,
            scale,
            band,
            centers,
        })
    }

    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn n_bins(&self) -> usize {
        self.weights[0].len()
    }
}

/// Peak-1.0 triangles with centers equally spaced on the warped axis; each triangle's
/// feet sit on its neighbours' centers.
///
/// A triangle narrower than the bin spacing may contain no bin; it then gets weight 1.0
/// on the bin nearest its center.
pub fn make_tri_filterbank(
    scale: FilterScale,
    n_filters: usize,
    f_min: f64,
    f_max: f64,
    fs: f64,
    n_bins: usize,
) -> Result<TriFilterBank> {
    if !(0.0 <= f_min && f_min < f_max && f_max <= fs / 2.0) {
        return Err(Error::arg(format!(
            "need 0 <= f_min < f_max <= fs/2, got {f_min}..{f_max} at fs={fs}"
        )));
    }
    if n_filters == 0 || n_bins < 2 {
        return Err(Error::arg("need at least one filter and two bins"));
    }
    let (lo, hi) = (scale.warp(f_min), scale.warp(f_max));
    let step = (hi - lo) / (n_filters + 1) as f64;
    let points: Vec<f64> = (0..n_filters + 2)
        .map(|i| scale.unwarp(lo + step * i as f64))
        .collect();
    if points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg(format!(
            "{} filter edges are not distinct between {f_min} and {f_max} Hz",
            n_filters + 2
        )));
    }
    let bin_hz = fs / (2 * (n_bins - 1)) as f64;
    let weights = (0..n_filters)
        .map(|i| {
            let (left, center, right) = (points[i], points[i + 1], points[i + 2]);
            let mut row: Vec<f64> = (0..n_bins)
                .map(|j| {
                    let f = j as f64 * bin_hz;
                    if f <= left || f >= right {
                        0.0
                    } else if f <= center {
                        (f - left) / (center - left)
                    } else {
                        (right - f) / (right - center)
                    }
                })
                .collect();
            if row.iter().all(|w| *w == 0.0) {
                let nearest = ((center / bin_hz).round() as usize).min(n_bins - 1);
                row[nearest] = 1.0;
            }
            row
        })
        .collect();
    TriFilterBank::from_weights(
        weights,
        scale,
        (f_min, f_max),
        points[1..=n_filters].to_vec(),
    )
}

/// `ln(sum_j w_ij S(m, j) + 1e-10)` per frame.
pub fn apply_filterbank(spec: &FeatureMatrix, fb: &TriFilterBank) -> Result<FeatureMatrix> {
    if spec.cols() != fb.n_bins() {
        return Err(Error::DimensionMismatch {
            expected: fb.n_bins(),
            got: spec.cols(),
        });
    }
    let n = fb.n_filters();
    let mut out = Vec::with_capacity(spec.rows() * n);
    for m in 0..spec.rows() {
        let frame = spec.row(m);
        out.extend(
            fb.weights
                .iter()
                .map(|w| w.iter().zip(frame).map(|(a, b)| a * b).sum::<f64>()),
        );
    }
    let energies = FeatureMatrix::new(spec.rows(), n, out, spec.frame_hop)?;
    log_compress(&energies, LOG_FLOOR)?.with_center_freqs(fb.centers.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_signal_has_129_bins() {
        let s = power_spectrogram(&vec![0.0; 1024], 44100.0, 256, 128, WindowKind::Hamming).unwrap();
        assert_eq!(s.cols(), 129);
        assert_eq!(s.rows(), 7);
        assert!(s.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dc_goes_to_bin_zero() {
        let s = power_spectrogram(&vec![1.0; 512], 8000.0, 256, 128, WindowKind::Rectangular).unwrap();
        for m in 0..s.rows() {
            assert!((s.get(m, 0) - 256.0 * 256.0).abs() < 1e-6);
            assert!(s.row(m)[1..].iter().all(|v| *v < 1e-12));
        }
    }

    #[test]
    fn tone_at_bin_center() {
        let fs = 44100.0;
        for j in [3usize, 20, 77, 120] {
            let f = j as f64 * fs / 256.0;
            let x: Vec<f64> = (0..2048).map(|n| (2.0 * PI * f * n as f64 / fs).cos()).collect();
            let s = power_spectrogram(&x, fs, 256, 128, WindowKind::Hamming).unwrap();
            let row = s.row(2);
            let best = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(best, j);
        }
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            power_spectrogram(&[0.0; 100], 8000.0, 256, 128, WindowKind::Hamming),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn warps_are_monotone_and_invertible() {
        for scale in [FilterScale::Mel, FilterScale::Linear, FilterScale::Erb] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=2205 {
                let f = i as f64 * 10.0;
                let w = scale.warp(f);
                assert!(w > prev);
                prev = w;
                assert!((scale.unwarp(w) - f).abs() < 1e-8 * f.max(1.0));
            }
        }
    }

    #[test]
    fn linear_centers_equally_spaced() {
        let fb = make_tri_filterbank(FilterScale::Linear, 10, 0.0, 4000.0, 8000.0, 129).unwrap();
        let d: Vec<f64> = fb.centers.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-9));
    }

    #[test]
    fn mel_spacing_grows() {
        let fb = make_tri_filterbank(FilterScale::Mel, 40, 0.0, 22050.0, 44100.0, 129).unwrap();
        assert_eq!(fb.n_filters(), 40);
        let d: Vec<f64> = fb.centers.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rows_and_coverage() {
        for scale in [FilterScale::Mel, FilterScale::Linear, FilterScale::Erb] {
            for (lo, hi) in [(0.0, 22050.0), (40.0, 5500.0)] {
                let fb = make_tri_filterbank(scale, 40, lo, hi, 44100.0, 129).unwrap();
                assert!(fb.weights.iter().all(|r| r.iter().any(|w| *w > 0.0)));
                assert!(fb.weights.iter().flatten().all(|w| *w >= 0.0 && *w <= 1.0));
                let left_edge = scale.unwarp(scale.warp(lo));
                for j in 0..129 {
                    let f = j as f64 * 44100.0 / 256.0;
                    if f > left_edge && f < hi * 0.999 {
                        let total: f64 = fb.weights.iter().map(|r| r[j]).sum();
                        assert!(total > 0.0, "{scale} bin {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn bad_bands() {
        assert!(make_tri_filterbank(FilterScale::Mel, 40, 100.0, 100.0, 8000.0, 129).is_err());
        assert!(make_tri_filterbank(FilterScale::Mel, 40, 0.0, 5000.0, 8000.0, 129).is_err());
        assert!(make_tri_filterbank(FilterScale::Mel, 0, 0.0, 4000.0, 8000.0, 129).is_err());
    }

    #[test]
    fn apply_cases() {
        let z = FeatureMatrix::zeros(3, 4, 1);
        let fb = make_tri_filterbank(FilterScale::Linear, 2, 0.0, 4000.0, 8000.0, 4).unwrap();
        let out = apply_filterbank(&z, &fb).unwrap();
        assert!(out.data().iter().all(|v| *v == LOG_FLOOR.ln()));

        let eye: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (i == j) as u8 as f64).collect()).collect();
        let ident = TriFilterBank::from_weights(eye, FilterScale::Linear, (0.0, 1.0), vec![0.0; 4]).unwrap();
        let spec = FeatureMatrix::new(1, 4, vec![1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let out = apply_filterbank(&spec, &ident).unwrap();
        for j in 0..4 {
            assert_eq!(out.get(0, j), (spec.get(0, j) + LOG_FLOOR).ln());
        }
        assert!(apply_filterbank(&FeatureMatrix::zeros(1, 5, 1), &fb).is_err());
    }
}
