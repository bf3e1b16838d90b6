use std::fmt::Write as _;

use super::config::{ClassifierConfig, ClassifierKind, ExperimentConfig};
use super::extract::{extract_manifest, FeatureCache, TrackFeatures};
use super::split::stratified_split;
use crate::classifiers::{
    chunk_sequence, evaluate, rnn_init, rnn_train, svm_train, Aggregation, Model, RnnClassifier, Standardizer,
};
use crate::error::{Error, Result};
use crate::signal_io::{DatasetManifest, FeatureMatrix};

/// Chunks of every track, in track order.
pub fn chunk_tracks(
    tracks: &[&TrackFeatures],
    chunk_len: usize,
    overlap: usize,
) -> Result<Vec<(Vec<FeatureMatrix>, usize)>> {
    tracks
        .iter()
        .map(|t| Ok((chunk_sequence(&t.features, chunk_len, overlap)?, t.label)))
        .collect()
}

/// Trains the configured classifier on chunked tracks. `seed_offset` is added to the
/// classifier seed, so repeats train with distinct but reproducible randomness.
pub fn train_model(
    tracks: &[&TrackFeatures],
    class_names: &[String],
    chunk_len: usize,
    overlap: usize,
    cfg: &ClassifierConfig,
    seed_offset: u64,
) -> Result<(Model, Vec<f64>)> {
    cfg.validate()?;
    let chunked = chunk_tracks(tracks, chunk_len, overlap)?;
    let labels: Vec<usize> = chunked.iter().flat_map(|(c, l)| std::iter::repeat(*l).take(c.len())).collect();
    let chunks: Vec<FeatureMatrix> = chunked.into_iter().flat_map(|(c, _)| c).collect();
    match cfg.kind {
        ClassifierKind::Svm => {
            let x: Vec<Vec<f64>> = chunks.into_iter().map(FeatureMatrix::into_data).collect();
            let (m, trace) = svm_train(&x, &labels, class_names, &cfg.svm_config(seed_offset))?;
            Ok((Model::Linear(m), trace.objective))
        }
        ClassifierKind::Rnn => {
            let dim = chunks.first().map_or(0, FeatureMatrix::cols);
            let norm = Standardizer::fit(
                tracks.iter().flat_map(|t| (0..t.features.rows()).map(|r| t.features.row(r))),
                dim,
            )?;
            let mut clf = RnnClassifier {
                model: rnn_init(dim, cfg.hidden, class_names.len(), cfg.seed.wrapping_add(seed_offset))?,
                norm,
                class_names: class_names.to_vec(),
            };
            let inputs = chunks.iter().map(|c| clf.standardize(c)).collect::<Result<Vec<_>>>()?;
            let history = rnn_train(&mut clf.model, &inputs, &labels, &cfg.rnn_config(seed_offset))?;
            Ok((Model::Rnn(clf), history))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatResult {
    pub split_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub track_accuracy: f64,
    /// Track accuracy under the aggregation mode that was not configured.
    pub alt_track_accuracy: f64,
    pub chunk_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    pub repeats: Vec<RepeatResult>,
    /// Track-level confusion summed over repeats, `[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ExperimentReport {
    pub fn track_accuracy(&self) -> (f64, f64) {
        mean_std(&self.repeats.iter().map(|r| r.track_accuracy).collect::<Vec<_>>())
    }

    pub fn alt_track_accuracy(&self) -> (f64, f64) {
        mean_std(&self.repeats.iter().map(|r| r.alt_track_accuracy).collect::<Vec<_>>())
    }

    pub fn chunk_accuracy(&self) -> (f64, f64) {
        mean_std(&self.repeats.iter().map(|r| r.chunk_accuracy).collect::<Vec<_>>())
    }

    /// Plain-text report; a deterministic function of config, data and seeds.
    pub fn to_text(&self) -> String {
        let cfg = &self.config;
        let p = &cfg.experiment;
        let agg = cfg.classifier.aggregation;
        let alt = other_mode(agg);
        let mut s = String::new();
        let _ = writeln!(s, "# experiment report");
        let _ = writeln!(
            s,
            "protocol: {} repeat(s) of a class-stratified random track split, test fraction {}, \
             split seed {} + repeat index; values are mean +- sample standard deviation over repeats",
            p.n_repeats, p.test_fraction, p.split_seed
        );
        let _ = writeln!(s, "feature: {}", cfg.feature.kind);
        let _ = writeln!(s, "classifier: {}", cfg.classifier.kind);
        let _ = writeln!(s, "track aggregation: {agg}");
        let _ = writeln!(s, "classes: {}", self.class_names.len());
        for (name, n) in self.class_names.iter().zip(&self.class_counts) {
            let _ = writeln!(s, "  {name}: {n} tracks");
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "repeat\tsplit_seed\ttrain\ttest\ttrack_acc\ttrack_acc_{alt}\tchunk_acc");
        for (r, res) in self.repeats.iter().enumerate() {
            let _ = writeln!(
                s,
                "{r}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                res.split_seed, res.n_train, res.n_test, res.track_accuracy, res.alt_track_accuracy, res.chunk_accuracy
            );
        }
        let _ = writeln!(s);
        let pct = |(m, sd): (f64, f64)| format!("{:.2} +- {:.2} %", 100.0 * m, 100.0 * sd);
        let _ = writeln!(s, "track accuracy ({agg}): {}", pct(self.track_accuracy()));
        let _ = writeln!(s, "track accuracy ({alt}): {}", pct(self.alt_track_accuracy()));
        let _ = writeln!(s, "chunk accuracy: {}", pct(self.chunk_accuracy()));
        let _ = writeln!(s);
        let _ = writeln!(s, "confusion over test tracks of all repeats (rows true, columns predicted):");
        let width = self.class_names.iter().map(String::len).max().unwrap_or(0).max(5);
        let _ = write!(s, "{:width$}", "");
        for name in &self.class_names {
            let _ = write!(s, " {name:>width$}");
        }
        let _ = writeln!(s);
        for (name, row) in self.class_names.iter().zip(&self.confusion) {
            let _ = write!(s, "{name:width$}");
            for n in row {
                let _ = write!(s, " {n:>width$}");
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "## configuration");
        s.push_str(&cfg.to_toml());
        s
    }
}

fn other_mode(m: Aggregation) -> Aggregation {
    match m {
        Aggregation::ChunkVote => Aggregation::ProbMean,
        Aggregation::ProbMean => Aggregation::ChunkVote,
    }
}

/// Runs the repeated split protocol on already extracted tracks.
pub fn run_on_tracks(
    cfg: &ExperimentConfig,
    tracks: &[TrackFeatures],
    class_names: &[String],
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n_classes = class_names.len();
    let labels: Vec<usize> = tracks.iter().map(|t| t.label).collect();
    let mut class_counts = vec![0; n_classes];
    labels.iter().for_each(|&l| class_counts[l] += 1);
    let mut repeats = Vec::with_capacity(cfg.experiment.n_repeats);
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    let (chunk_len, overlap) = (cfg.feature.chunk_len, cfg.feature.overlap);
    for r in 0..cfg.experiment.n_repeats as u64 {
        let split_seed = cfg.experiment.split_seed.wrapping_add(r);
        let split = stratified_split(&labels, n_classes, cfg.experiment.test_fraction, split_seed)?;
        let train: Vec<&TrackFeatures> = split.train.iter().map(|&i| &tracks[i]).collect();
        let test: Vec<&TrackFeatures> = split.test.iter().map(|&i| &tracks[i]).collect();
        let (model, _) = train_model(&train, class_names, chunk_len, overlap, &cfg.classifier, r)?;
        let test_chunks = chunk_tracks(&test, chunk_len, overlap)?;
        let agg = cfg.classifier.aggregation;
        let main = evaluate(&model, &test_chunks, agg)?;
        let alt = evaluate(&model, &test_chunks, other_mode(agg))?;
        for (row, add) in confusion.iter_mut().zip(&main.confusion) {
            row.iter_mut().zip(add).for_each(|(a, b)| *a += b);
        }
        repeats.push(RepeatResult {
            split_seed,
            n_train: split.train.len(),
            n_test: split.test.len(),
            track_accuracy: main.track_accuracy,
            alt_track_accuracy: alt.track_accuracy,
            chunk_accuracy: main.chunk_accuracy,
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        class_names: class_names.to_vec(),
        class_counts,
        repeats,
        confusion,
    })
}

/// Extracts (through `cache`) and runs the full protocol on a manifest.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    manifest: &DatasetManifest,
    cache: &FeatureCache,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let tracks = extract_manifest(manifest, &cfg.feature, cache)?;
    if let Some(t) = tracks.iter().find(|t| !t.features.is_finite()) {
        return Err(Error::Numeric(format!("non-finite features for {}", t.source)));
    }
    run_on_tracks(cfg, &tracks, &manifest.class_names)
}
