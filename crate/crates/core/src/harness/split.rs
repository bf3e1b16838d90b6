use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Track indices of one train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Checks that train and test partition `0..n` with no overlap.
    pub fn check_partition(&self, n: usize) -> Result<()> {
        let mut seen = vec![0u8; n];
        for &i in self.train.iter().chain(&self.test) {
            if i >= n || seen[i] != 0 {
                return Err(Error::Numeric(format!("split leaks or repeats track {i}")));
            }
            seen[i] = 1;
        }
        if seen.iter().any(|s| *s == 0) {
            return Err(Error::Numeric("split drops tracks".into()));
        }
        Ok(())
    }
}

/// Per class, shuffles that class's tracks and sends `round(test_fraction * n_c)` of
/// them (at least one, leaving at least one for training) to the test side.
pub fn stratified_split(labels: &[usize], n_classes: usize, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::arg(format!("test_fraction must lie in (0, 1), got {test_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..n_classes {
        let mut idx: Vec<usize> = labels.iter().enumerate().filter(|(_, &l)| l == c).map(|(i, _)| i).collect();
        if idx.len() < 2 {
            return Err(Error::Format(format!(
                "class {c} has {} track(s); stratified splitting needs at least 2",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n_test = ((test_fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let split = Split { train, test };
    split.check_partition(labels.len())?;
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportions_per_class() {
        let labels: Vec<usize> = (0..200).map(|i| i % 4).collect();
        let s = stratified_split(&labels, 4, 0.2, 3).unwrap();
        assert_eq!(s.test.len(), 40);
        for c in 0..4 {
            let n = s.test.iter().filter(|&&i| labels[i] == c).count();
            assert_eq!(n, 10);
        }
        assert_ne!(s, stratified_split(&labels, 4, 0.2, 4).unwrap());
        assert_eq!(s, stratified_split(&labels, 4, 0.2, 3).unwrap());
    }

    #[test]
    fn uneven_classes_within_one_track() {
        let labels = [0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2];
        let s = stratified_split(&labels, 3, 0.3, 0).unwrap();
        for (c, n_c) in [(0, 3), (1, 7), (2, 2)] {
            let n = s.test.iter().filter(|&&i| labels[i] == c).count() as f64;
            assert!((n - 0.3 * n_c as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn singleton_class_errors() {
        assert!(stratified_split(&[0, 0, 1], 2, 0.2, 0).is_err());
    }
}
