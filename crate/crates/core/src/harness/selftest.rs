//! Built-in numerical self-checks run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::adaptive::{adaptive_stdct, AdctConfig};
use crate::classifiers::{rnn_gradient_check, rnn_init};
use crate::error::Result;
use crate::filterbanks::{FrequencyGrid, WindowKind};
use crate::signal_io::FeatureMatrix;
use crate::stdct::{gram_oracle_deviation, shift_covariance_deviation, short_time_dct, StdctConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub worst: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tolerance {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance
        )
    }
}

fn suite(name: &'static str, tolerance: f64, worst: Result<f64>) -> Result<SuiteResult> {
    let worst = worst?;
    Ok(SuiteResult {
        name,
        passed: worst < tolerance,
        worst,
        tolerance,
    })
}

fn gaussian(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Small two-layer configurations used by the quadratic-form and shift checks.
pub fn small_configs() -> Vec<(usize, StdctConfig, StdctConfig)> {
    use WindowKind::*;
    vec![
        (64, StdctConfig::new(8, 4, Hamming), StdctConfig::new(4, 2, Hann)),
        (96, StdctConfig::new(16, 8, Hann), StdctConfig::new(4, 1, Rectangular)),
        (128, StdctConfig::new(16, 4, Hamming), StdctConfig::new(8, 4, Hamming)),
        (200, StdctConfig::new(32, 16, Rectangular), StdctConfig::new(4, 2, Hamming).with_channels(3)),
        (256, StdctConfig::new(32, 8, Hamming).with_channels(20), StdctConfig::new(8, 2, Hann)),
    ]
}

pub fn gram_suite() -> Result<SuiteResult> {
    let worst = small_configs()
        .iter()
        .enumerate()
        .map(|(i, (len, l1, l2))| gram_oracle_deviation(*len, l1, l2, 5, i as u64))
        .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)));
    suite("quadratic-form oracle", 1e-9, worst)
}

pub fn shift_suite() -> Result<SuiteResult> {
    let l1 = StdctConfig::new(16, 4, WindowKind::Hamming).circular();
    let l2 = StdctConfig::new(8, 2, WindowKind::Hann).circular();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = gaussian(128, &mut rng);
        let shift = 8 * (1 + i % 15);
        worst = worst.max(shift_covariance_deviation(&x, &l1, &l2, shift)?);
    }
    suite("circular shift covariance", 1e-9, Ok(worst))
}

pub fn gradient_suite() -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (d, h, c, t) = (
            rng.gen_range(1..=6),
            rng.gen_range(2..=8),
            rng.gen_range(2..=4),
            rng.gen_range(2..=10),
        );
        let mut m = rnn_init(d, h, c, seed)?;
        // scale parameters up so tanh leaves its linear regime
        for v in m.w_in.iter_mut().chain(m.v.iter_mut()) {
            *v *= 50.0;
        }
        for v in m.b_h.iter_mut().chain(m.b_y.iter_mut()) {
            *v = rng.gen_range(-0.5..0.5);
        }
        let seq = FeatureMatrix::new(t, d, gaussian(t * d, &mut rng), 1)?;
        worst = worst.max(rnn_gradient_check(&m, &seq, rng.gen_range(0..c))?);
    }
    suite("RNN gradient check", 1e-4, Ok(worst))
}

/// Adaptive transform on a linear grid `k fs / 2N` with fixed length `N` against the
/// plain short-time DCT.
pub fn reduction_suite() -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (n, hop, kind) in [(16, 4, WindowKind::Hamming), (32, 8, WindowKind::Hann), (25, 5, WindowKind::Rectangular)] {
        let fs = 8000.0;
        let freqs = (0..n).map(|k| k as f64 * fs / (2 * n) as f64).collect();
        let cfg = AdctConfig {
            window: kind,
            min_len: n,
            max_len: n,
            ..AdctConfig::new(FrequencyGrid::custom(freqs, 1)?, fs, hop)
        };
        let x = gaussian(300, &mut rng);
        let a = adaptive_stdct(&x, &cfg)?;
        let b = short_time_dct(&x, &StdctConfig::new(n, hop, kind))?;
        if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
            return suite("adaptive-to-linear reduction", 1e-12, Ok(f64::INFINITY));
        }
        for (u, v) in a.data().iter().zip(b.data()) {
            worst = worst.max((u - v).abs());
        }
    }
    suite("adaptive-to-linear reduction", 1e-12, Ok(worst))
}

pub fn run_selftests() -> Result<Vec<SuiteResult>> {
    Ok(vec![gram_suite()?, shift_suite()?, gradient_suite()?, reduction_suite()?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for r in run_selftests().unwrap() {
            assert!(r.passed, "{r}");
        }
    }
}
