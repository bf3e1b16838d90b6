//! One-vs-rest linear SVM trained with the Pegasos stochastic subgradient method.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `n_classes x dim`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub norm: Standardizer,
    pub class_names: Vec<String>,
}

impl LinearModel {
    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    /// Class scores `W z + b` of a raw (unstandardized) vector.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = self.norm.apply(x);
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, &z) + b)
            .collect())
    }
}

/// Objective value per epoch; entry 0 is the zero-weight starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrace {
    pub objective: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `w = scale * v`, so the per-step shrink is O(1). The bias is carried as a constant
/// input feature and is regularized like the other weights.
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    norm_sq_v: f64,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        Self {
            v: vec![0.0; dim + 1],
            scale: 1.0,
            norm_sq_v: 0.0,
        }
    }

    fn margin(&self, z: &[f64]) -> f64 {
        let d = z.len();
        self.scale * (dot(&self.v[..d], z) + self.v[d])
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|x| *x = 0.0);
            self.scale = 1.0;
            self.norm_sq_v = 0.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.v.iter_mut().for_each(|x| *x *= self.scale);
            self.norm_sq_v *= self.scale * self.scale;
            self.scale = 1.0;
        }
    }

    /// `w += c * [z, 1]`.
    fn add(&mut self, c: f64, z: &[f64]) {
        let d = z.len();
        let cv = c / self.scale;
        let vz = dot(&self.v[..d], z) + self.v[d];
        let zz = dot(z, z) + 1.0;
        for (v, x) in self.v[..d].iter_mut().zip(z) {
            *v += cv * x;
        }
        self.v[d] += cv;
        self.norm_sq_v += 2.0 * cv * vz + cv * cv * zz;
    }

    fn norm_sq(&self) -> f64 {
        self.scale * self.scale * self.norm_sq_v.max(0.0)
    }

    fn into_parts(self) -> (Vec<f64>, f64) {
        let scale = self.scale;
        let mut w: Vec<f64> = self.v.into_iter().map(|x| x * scale).collect();
        let b = w.pop().expect("bias slot");
        (w, b)
    }
}

fn objective(models: &[ScaledWeights], data: &[Vec<f64>], y: &[usize], lambda: f64) -> f64 {
    let n = data.len() as f64;
    models
        .iter()
        .enumerate()
        .map(|(c, w)| {
            let hinge: f64 = data
                .iter()
                .zip(y)
                .map(|(z, &yi)| {
                    let sign = if yi == c { 1.0 } else { -1.0 };
                    (1.0 - sign * w.margin(z)).max(0.0)
                })
                .sum();
            0.5 * lambda * w.norm_sq() + hinge / n
        })
        .sum()
}

/// Trains one binary Pegasos SVM per class on standardized inputs. Every class sees the
/// same seeded sample order, so training is deterministic given `cfg.seed`.
pub fn svm_train(
    x: &[Vec<f64>],
    y: &[usize],
    class_names: &[String],
    cfg: &SvmConfig,
) -> Result<(LinearModel, SvmTrace)> {
    let n_classes = class_names.len();
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::arg(format!(
            "need matching non-empty data and labels, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !(cfg.lambda > 0.0) || cfg.epochs == 0 {
        return Err(Error::arg("lambda must be positive and epochs at least 1"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::arg(format!("label {bad} out of range for {n_classes} classes")));
    }
    let mut present = vec![false; n_classes];
    y.iter().for_each(|&c| present[c] = true);
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(Error::arg("training data must contain at least two classes"));
    }
    let dim = x[0].len();
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite value in SVM training features".into()));
        }
    }

    let norm = Standardizer::fit(x.iter().map(Vec::as_slice), dim)?;
    let data: Vec<Vec<f64>> = x.iter().map(|r| norm.apply(r)).collect();
    let mut models: Vec<ScaledWeights> = (0..n_classes).map(|_| ScaledWeights::new(dim)).collect();
    let radius_sq = 1.0 / cfg.lambda;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = vec![objective(&models, &data, y, cfg.lambda)];
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.lambda * t as f64);
            let z = &data[i];
            for (c, w) in models.iter_mut().enumerate() {
                let sign = if y[i] == c { 1.0 } else { -1.0 };
                let margin = sign * w.margin(z);
                w.shrink(1.0 - eta * cfg.lambda);
                if margin < 1.0 {
                    w.add(eta * sign, z);
                }
                let ns = w.norm_sq();
                if ns > radius_sq {
                    w.shrink((radius_sq / ns).sqrt());
                }
            }
        }
        trace.push(objective(&models, &data, y, cfg.lambda));
    }

    let (weights, bias) = models.into_iter().map(ScaledWeights::into_parts).unzip();
    Ok((
        LinearModel {
            weights,
            bias,
            norm,
            class_names: class_names.to_vec(),
        },
        SvmTrace { objective: trace },
    ))
}

/// Highest-scoring class, ties toward the lower index, plus all scores.
pub fn svm_predict(model: &LinearModel, x: &[f64]) -> Result<(usize, Vec<f64>)> {
    let scores = model.scores(x)?;
    Ok((argmax(&scores), scores))
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in v.iter().enumerate().skip(1) {
        if s > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    /// Gaussian blobs around the given centers.
    fn blobs(centers: &[[f64; 2]], per: usize, spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                x.push(vec![center[0] + spread * dx, center[1] + spread * dy]);
                y.push(c);
            }
        }
        (x, y)
    }

    fn accuracy(m: &LinearModel, x: &[Vec<f64>], y: &[usize]) -> f64 {
        let ok = x.iter().zip(y).filter(|(v, &c)| svm_predict(m, v).unwrap().0 == c).count();
        ok as f64 / y.len() as f64
    }

    #[test]
    fn separable_blobs_fit_perfectly() {
        // uniform boxes of half-width 1 around centers 4 apart leave a margin of 1 each side
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            let c = i % 2;
            let cx = if c == 0 { -2.0 } else { 2.0 };
            x.push(vec![cx + rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0)]);
            y.push(c);
        }
        let cfg = SvmConfig { lambda: 1e-3, epochs: 50, seed: 3 };
        let (m, trace) = svm_train(&x, &y, &names(2), &cfg).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        assert!(trace.objective.last().unwrap() < &trace.objective[0]);
    }

    #[test]
    fn identical_features_give_chance() {
        let x = vec![vec![0.5, 0.5]; 40];
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let (m, _) = svm_train(&x, &y, &names(2), &SvmConfig::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 0.5);
    }

    #[test]
    fn four_blobs_held_out() {
        let centers = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]];
        let (x, y) = blobs(&centers, 100, 0.8, 11);
        let (xt, yt) = blobs(&centers, 50, 0.8, 12);
        let cfg = SvmConfig { lambda: 1e-3, epochs: 30, seed: 5 };
        let (m, trace) = svm_train(&x, &y, &names(4), &cfg).unwrap();
        assert!(accuracy(&m, &xt, &yt) >= 0.95);
        assert!(trace.objective.last().unwrap() < &trace.objective[0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = blobs(&[[0.0, 0.0], [2.0, 2.0], [4.0, 0.0]], 30, 1.0, 2);
        let cfg = SvmConfig { lambda: 1e-3, epochs: 5, seed: 9 };
        let (a, _) = svm_train(&x, &y, &names(3), &cfg).unwrap();
        let (b, _) = svm_train(&x, &y, &names(3), &cfg).unwrap();
        let bits = |m: &LinearModel| m.weights.iter().flatten().chain(&m.bias).map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn affine_rescaling_does_not_change_predictions() {
        let (x, y) = blobs(&[[0.0, 0.0], [3.0, 1.0], [1.0, 3.0]], 40, 1.0, 4);
        let (xt, _) = blobs(&[[0.0, 0.0], [3.0, 1.0], [1.0, 3.0]], 20, 1.2, 5);
        // powers of two keep the affine map exact in floating point
        let warp = |v: &Vec<f64>| vec![v[0] * 4.0 + 256.0, v[1] * 0.125 - 8.0];
        let cfg = SvmConfig { lambda: 1e-3, epochs: 10, seed: 1 };
        let (a, _) = svm_train(&x, &y, &names(3), &cfg).unwrap();
        let xw: Vec<Vec<f64>> = x.iter().map(warp).collect();
        let (b, _) = svm_train(&xw, &y, &names(3), &cfg).unwrap();
        for v in &xt {
            assert_eq!(svm_predict(&a, v).unwrap().0, svm_predict(&b, &warp(v)).unwrap().0);
        }
    }

    #[test]
    fn zero_model_ties_to_first_class() {
        let m = LinearModel {
            weights: vec![vec![0.0; 3]; 4],
            bias: vec![0.0; 4],
            norm: Standardizer::identity(3),
            class_names: names(4),
        };
        assert_eq!(svm_predict(&m, &[0.0; 3]).unwrap().0, 0);
        assert!(svm_predict(&m, &[0.0; 2]).is_err());
    }

    #[test]
    fn rejects_bad_training_sets() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(svm_train(&x, &[0, 0], &names(2), &SvmConfig::default()).is_err());
        let x = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(
            svm_train(&x, &[0, 1], &names(2), &SvmConfig::default()),
            Err(Error::Numeric(_))
        ));
    }
}
