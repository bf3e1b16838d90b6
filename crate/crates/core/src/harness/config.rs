use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptive::AdctNetParams;
use crate::classifiers::{Aggregation, RnnTrainConfig, SvmConfig};
use crate::error::{Error, Result};
use crate::filterbanks::WindowKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    #[default]
    Adctnet,
    Dctnet,
    Mfsc,
    Lfsc,
    Erb,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::Adctnet,
        FeatureKind::Dctnet,
        FeatureKind::Mfsc,
        FeatureKind::Lfsc,
        FeatureKind::Erb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Adctnet => "adctnet",
            FeatureKind::Dctnet => "dctnet",
            FeatureKind::Mfsc => "mfsc",
            FeatureKind::Lfsc => "lfsc",
            FeatureKind::Erb => "erb",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown feature '{s}' (adctnet|dctnet|mfsc|lfsc|erb)")))
    }
}

/// Feature extraction and chunking settings. Keys are flat; each feature kind reads the
/// subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub kind: FeatureKind,
    /// Lower band edge, Hz. Adaptive features default to 40, baselines to 0.
    pub fmin: Option<f64>,
    /// Upper band edge, Hz. Adaptive features default to 5500, baselines to fs/2.
    pub fmax: Option<f64>,
    pub fmin2: Option<f64>,
    pub b1: u32,
    pub b2: u32,
    /// Layer hops shared by both cascades.
    pub hop1: usize,
    pub hop2: usize,
    /// Fixed layer window lengths of the plain DCTNet.
    pub win1: usize,
    pub win2: usize,
    pub window: WindowKind,
    pub min_len: usize,
    pub max_len1: usize,
    pub max_len2: usize,
    pub normalize: bool,
    /// Spectrogram window and hop of the filterbank baselines.
    pub win: usize,
    pub hop: usize,
    pub nfilters: usize,
    /// Natural log with a 1e-10 floor on the pooled cascade energies.
    pub log: bool,
    pub chunk_len: usize,
    pub overlap: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let a = AdctNetParams::default();
        Self {
            kind: FeatureKind::Adctnet,
            fmin: None,
            fmax: None,
            fmin2: None,
            b1: a.b1,
            b2: a.b2,
            hop1: a.hop1,
            hop2: a.hop2,
            win1: 256,
            win2: 32,
            window: a.window,
            min_len: a.min_len,
            max_len1: a.max_len1,
            max_len2: a.max_len2,
            normalize: a.normalize,
            win: 256,
            hop: 128,
            nfilters: 40,
            log: true,
            chunk_len: 60,
            overlap: 30,
        }
    }
}

impl FeatureConfig {
    pub fn adct_params(&self) -> AdctNetParams {
        let d = AdctNetParams::default();
        AdctNetParams {
            fmin: self.fmin.unwrap_or(d.fmin),
            fmax: self.fmax.unwrap_or(d.fmax),
            fmin2: self.fmin2,
            b1: self.b1,
            b2: self.b2,
            hop1: self.hop1,
            hop2: self.hop2,
            window: self.window,
            min_len: self.min_len,
            max_len1: self.max_len1,
            max_len2: self.max_len2,
            normalize: self.normalize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_len == 0 || self.overlap >= self.chunk_len {
            return Err(Error::arg(format!(
                "need 0 <= overlap < chunk_len, got {} / {}",
                self.overlap, self.chunk_len
            )));
        }
        Ok(())
    }

    /// Canonical text used in cache keys and reports.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("feature config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Svm,
    Rnn,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Rnn => "rnn",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(ClassifierKind::Svm),
            "rnn" => Ok(ClassifierKind::Rnn),
            _ => Err(Error::arg(format!("unknown classifier '{s}' (svm|rnn)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub lambda: f64,
    /// Defaults to 20 for the SVM and 100 for the RNN.
    pub epochs: Option<usize>,
    pub lr: f64,
    pub clip: f64,
    pub hidden: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let r = RnnTrainConfig::default();
        Self {
            kind: ClassifierKind::Svm,
            lambda: SvmConfig::default().lambda,
            epochs: None,
            lr: r.lr,
            clip: r.clip,
            hidden: 64,
            seed: 0,
            aggregation: Aggregation::ProbMean,
        }
    }
}

impl ClassifierConfig {
    pub fn svm_config(&self, seed_offset: u64) -> SvmConfig {
        SvmConfig {
            lambda: self.lambda,
            epochs: self.epochs.unwrap_or(SvmConfig::default().epochs),
            seed: self.seed.wrapping_add(seed_offset),
        }
    }

    pub fn rnn_config(&self, seed_offset: u64) -> RnnTrainConfig {
        RnnTrainConfig {
            lr: self.lr,
            epochs: self.epochs.unwrap_or(RnnTrainConfig::default().epochs),
            clip: self.clip,
            seed: self.seed.wrapping_add(seed_offset),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::arg(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.epochs == Some(0) {
            return Err(Error::arg("epochs must be at least 1"));
        }
        if !(self.lr >= 0.0) || !(self.clip > 0.0) {
            return Err(Error::arg("lr must be non-negative and clip positive"));
        }
        if self.hidden == 0 {
            return Err(Error::arg("hidden must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub n_repeats: usize,
    pub split_seed: u64,
    pub test_fraction: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n_repeats: 10,
            split_seed: 0,
            test_fraction: 0.2,
        }
    }
}

/// Full experiment description, read from TOML with `[feature]`, `[classifier]` and
/// `[experiment]` tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub feature: FeatureConfig,
    pub classifier: ClassifierConfig,
    pub experiment: ProtocolConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::arg(format!("invalid experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        self.feature.validate()?;
        self.classifier.validate()?;
        let p = &self.experiment;
        if p.n_repeats == 0 {
            return Err(Error::arg("n_repeats must be at least 1"));
        }
        if !(p.test_fraction > 0.0 && p.test_fraction < 1.0) {
            return Err(Error::arg(format!(
                "test_fraction must lie in (0, 1), got {}",
                p.test_fraction
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sections_and_defaults() {
        let cfg = ExperimentConfig::parse(
            "[feature]\nkind = \"mfsc\"\nnfilters = 20\n\n[classifier]\nkind = \"rnn\"\nhidden = 8\n\n[experiment]\nn_repeats = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.feature.kind, FeatureKind::Mfsc);
        assert_eq!(cfg.feature.nfilters, 20);
        assert_eq!(cfg.feature.win, 256);
        assert_eq!(cfg.classifier.kind, ClassifierKind::Rnn);
        assert_eq!(cfg.classifier.rnn_config(0).epochs, 100);
        assert_eq!(cfg.experiment.n_repeats, 3);
        assert_eq!(cfg.experiment.test_fraction, 0.2);
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("[experiment]\ntest_fraction = 1.0\n").is_err());
        assert!(ExperimentConfig::parse("[experiment]\nn_repeats = 0\n").is_err());
        assert!(ExperimentConfig::parse("[feature]\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("[feature]\nkind = \"mfcc\"\n").is_err());
        assert!(ExperimentConfig::parse("[feature]\nchunk_len = 10\noverlap = 10\n").is_err());
    }

    #[test]
    fn adct_band_defaults() {
        let p = FeatureConfig::default().adct_params();
        assert_eq!((p.fmin, p.fmax), (40.0, 5500.0));
    }
}
