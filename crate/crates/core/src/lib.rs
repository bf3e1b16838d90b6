//! DCTNet and adaptive (constant-Q) DCTNet time-frequency features for audio, with
//! spectrogram filterbank baselines and two classifiers (one-vs-rest linear SVM and a
//! single-hidden-layer RNN).

pub mod adaptive;
pub mod baselines;
pub mod classifiers;
pub mod error;
pub mod filterbanks;
pub mod harness;
pub mod signal_io;
pub mod stdct;

pub use adaptive::{adaptive_stdct, adctnet_two_layer, AdctConfig, AdctNetParams, AdaptiveStdct};
pub use error::{Error, Result};
pub use filterbanks::{FilterBank, FrequencyGrid, WindowKind};
pub use signal_io::{FeatureMatrix, Signal};
pub use stdct::{dctnet_forward, pool_energy, short_time_dct, LayeredTensor, StdctConfig};
pub use classifiers::{LinearModel, Model, RnnModel};
pub use harness::{ExperimentConfig, ExperimentReport, FeatureConfig, FeatureKind};
