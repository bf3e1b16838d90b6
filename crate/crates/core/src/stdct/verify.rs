//! Discrete checks that pooled DCTNet energy behaves like a Cohen's-class distribution:
//! it is a quadratic form in the signal, and it is covariant under circular shifts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{dctnet_forward, pool_energy, ConvMode, StdctConfig};
use crate::error::{Error, Result};

/// Linear functionals `a[m, k1, k2]` of a two-layer DCTNet at a fixed input length,
/// recovered by pushing every standard basis vector through the network.
#[derive(Debug, Clone)]
pub struct GramOracle {
    len: usize,
    frames: usize,
    channels1: usize,
    channels2: usize,
    /// `functionals[i]` is the tensor produced by `e_i`.
    functionals: Vec<Vec<f64>>,
}

impl GramOracle {
    pub fn build(len: usize, layer1: &StdctConfig, layer2: &StdctConfig) -> Result<Self> {
        if len == 0 {
            return Err(Error::arg("oracle needs a positive signal length"));
        }
        let mut functionals = Vec::with_capacity(len);
        let mut dims = (0, 0, 0);
        let mut basis = vec![0.0; len];
        for i in 0..len {
            basis[i] = 1.0;
            let t = dctnet_forward(&basis, layer1, layer2)?;
            basis[i] = 0.0;
            dims = (t.frames, t.channels1, t.channels2);
            functionals.push(t.data);
        }
        Ok(Self {
            len,
            frames: dims.0,
            channels1: dims.1,
            channels2: dims.2,
            functionals,
        })
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.frames, self.channels2)
    }

    /// Gram matrix `G = sum_k1 a a^T` of output cell `(m, k2)`, row-major `len x len`.
    pub fn gram(&self, m: usize, k2: usize) -> Vec<f64> {
        let n = self.len;
        let mut g = vec![0.0; n * n];
        let mut a = vec![0.0; n];
        for k1 in 0..self.channels1 {
            let idx = (m * self.channels1 + k1) * self.channels2 + k2;
            for (ai, f) in a.iter_mut().zip(&self.functionals) {
                *ai = f[idx];
            }
            for i in 0..n {
                if a[i] == 0.0 {
                    continue;
                }
                let row = &mut g[i * n..(i + 1) * n];
                for (gij, aj) in row.iter_mut().zip(&a) {
                    *gij += a[i] * aj;
                }
            }
        }
        g
    }

    /// Max relative deviation between pooled DCTNet energy and `x^T G x` over all cells
    /// and the given signals.
    pub fn max_deviation(
        &self,
        signals: &[Vec<f64>],
        layer1: &StdctConfig,
        layer2: &StdctConfig,
    ) -> Result<f64> {
        let pooled = signals
            .iter()
            .map(|x| {
                if x.len() != self.len {
                    return Err(Error::DimensionMismatch {
                        expected: self.len,
                        got: x.len(),
                    });
                }
                Ok(pool_energy(&dctnet_forward(x, layer1, layer2)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = self.len;
        let mut worst: f64 = 0.0;
        for m in 0..self.frames {
            for k2 in 0..self.channels2 {
                let g = self.gram(m, k2);
                for (x, f) in signals.iter().zip(&pooled) {
                    let mut q = 0.0;
                    for i in 0..n {
                        let gx: f64 = g[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
                        q += x[i] * gx;
                    }
                    let fv = f.get(m, k2);
                    worst = worst.max((fv - q).abs() / (fv.abs() + 1e-30));
                }
            }
        }
        Ok(worst)
    }
}

/// Builds the Gram oracle at `len` and returns its worst relative deviation over
/// `trials` seeded Gaussian signals.
pub fn gram_oracle_deviation(
    len: usize,
    layer1: &StdctConfig,
    layer2: &StdctConfig,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let oracle = GramOracle::build(len, layer1, layer2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals: Vec<Vec<f64>> = (0..trials)
        .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    oracle.max_deviation(&signals, layer1, layer2)
}

/// Circularly delays `x` by `shift` samples and compares pooled energy against the
/// original pooled energy rolled by `shift / (hop1 * hop2)` frames. Returns the max
/// absolute difference.
pub fn shift_covariance_deviation(
    x: &[f64],
    layer1: &StdctConfig,
    layer2: &StdctConfig,
    shift: usize,
) -> Result<f64> {
    if layer1.conv_mode != ConvMode::Circular || layer2.conv_mode != ConvMode::Circular {
        return Err(Error::arg("shift covariance needs circular mode in both layers"));
    }
    let hop = layer1.hop * layer2.hop;
    if shift % hop != 0 {
        return Err(Error::arg(format!(
            "shift {shift} is not a multiple of the composed hop {hop}"
        )));
    }
    let len = x.len();
    if len == 0 || len % layer1.hop != 0 || (len / layer1.hop) % layer2.hop != 0 {
        return Err(Error::arg(format!(
            "signal length {len} must divide evenly by hop1={} and then hop2={}",
            layer1.hop, layer2.hop
        )));
    }
    let shifted: Vec<f64> = (0..len).map(|n| x[(n + len - shift % len) % len]).collect();
    let f = pool_energy(&dctnet_forward(x, layer1, layer2)?);
    let g = pool_energy(&dctnet_forward(&shifted, layer1, layer2)?);
    let frames = f.rows();
    let d = (shift / hop) % frames.max(1);
    let mut worst: f64 = 0.0;
    for m in 0..frames {
        let src = (m + frames - d) % frames;
        for k in 0..f.cols() {
            worst = worst.max((g.get(m, k) - f.get(src, k)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbanks::WindowKind;

    fn small() -> (StdctConfig, StdctConfig) {
        (
            StdctConfig::new(16, 4, WindowKind::Hamming),
            StdctConfig::new(8, 4, WindowKind::Hann),
        )
    }

    #[test]
    fn basis_vector_is_exact() {
        let (l1, l2) = small();
        let oracle = GramOracle::build(64, &l1, &l2).unwrap();
        let mut e0 = vec![0.0; 64];
        e0[0] = 1.0;
        assert_eq!(oracle.max_deviation(&[e0], &l1, &l2).unwrap(), 0.0);
    }

    #[test]
    fn random_trials_small_config() {
        let (l1, l2) = small();
        let dev = gram_oracle_deviation(128, &l1, &l2, 10, 7).unwrap();
        assert!(dev < 1e-9, "{dev}");
    }

    #[test]
    fn shift_zero_and_constant_signal() {
        let l1 = StdctConfig::new(8, 2, WindowKind::Hamming).circular();
        let l2 = StdctConfig::new(4, 2, WindowKind::Hamming).circular();
        let x: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        assert_eq!(shift_covariance_deviation(&x, &l1, &l2, 0).unwrap(), 0.0);
        let c = vec![0.3; 64];
        for s in [4, 8, 60] {
            assert_eq!(shift_covariance_deviation(&c, &l1, &l2, s).unwrap(), 0.0);
        }
        assert!(shift_covariance_deviation(&x, &l1, &l2, 3).is_err());
        assert!(shift_covariance_deviation(&x[..62], &l1, &l2, 4).is_err());
        let valid = StdctConfig::new(4, 2, WindowKind::Hamming);
        assert!(shift_covariance_deviation(&x, &l1, &valid, 4).is_err());
    }

    #[test]
    fn shift_is_covariant_not_invariant() {
        let l1 = StdctConfig::new(8, 1, WindowKind::Hamming).circular();
        let l2 = StdctConfig::new(8, 1, WindowKind::Hamming).circular();
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).sin() + (i % 5) as f64).collect();
        assert!(shift_covariance_deviation(&x, &l1, &l2, 17).unwrap() < 1e-9);
        // comparing without the frame roll must show a real difference
        let f = pool_energy(&dctnet_forward(&x, &l1, &l2).unwrap());
        let shifted: Vec<f64> = (0..64).map(|n| x[(n + 64 - 17) % 64]).collect();
        let g = pool_energy(&dctnet_forward(&shifted, &l1, &l2).unwrap());
        let diff = f.data().iter().zip(g.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-3);
    }
}
