//! Experiment orchestration: feature extraction over manifests with a content-hash cache,
//! repeated stratified splits, text reports, PGM plots, a synthetic dataset and the
//! built-in self-checks.

mod config;
mod experiment;
mod extract;
mod feature_set;
mod plot;
mod selftest;
mod split;
mod synth;

pub use config::{ClassifierConfig, ClassifierKind, ExperimentConfig, FeatureConfig, FeatureKind, ProtocolConfig};
pub use experiment::{
    chunk_tracks, mean_std, run_experiment, run_on_tracks, train_model, ExperimentReport, RepeatResult,
};
pub use extract::{cache_key, extract_features, extract_manifest, FeatureCache, TrackFeatures};
pub use feature_set::{FeatureSet, HEADER_FILE, INDEX_FILE};
pub use plot::{emit_plot, plot_bytes};
pub use selftest::{
    gradient_suite, gram_suite, reduction_suite, run_selftests, shift_suite, small_configs, SuiteResult,
};
pub use split::{stratified_split, Split};
pub use synth::{synth_dataset, write_synth_dataset, SynthClip, SynthConfig, SYNTH_CLASSES};
