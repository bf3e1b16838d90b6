use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rnn::{rnn_forward, softmax, RnnModel};
use super::standardize::Standardizer;
use super::svm::{argmax, LinearModel};
use crate::error::{Error, Result};
use crate::signal_io::FeatureMatrix;

/// How chunk outputs are combined into one decision per track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    ChunkVote,
    #[default]
    ProbMean,
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregation::ChunkVote => "chunk_vote",
            Aggregation::ProbMean => "prob_mean",
        })
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chunk_vote" => Ok(Aggregation::ChunkVote),
            "prob_mean" => Ok(Aggregation::ProbMean),
            _ => Err(Error::arg(format!("unknown aggregation mode '{s}' (chunk_vote|prob_mean)"))),
        }
    }
}

/// Anything that maps one chunk to class probabilities.
pub trait ChunkClassifier: Sync {
    fn n_classes(&self) -> usize;
    fn chunk_probs(&self, chunk: &FeatureMatrix) -> Result<Vec<f64>>;
}

impl ChunkClassifier for LinearModel {
    fn n_classes(&self) -> usize {
        LinearModel::n_classes(self)
    }

    /// Softmax of the one-vs-rest scores of the flattened chunk.
    fn chunk_probs(&self, chunk: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(softmax(&self.scores(chunk.data())?))
    }
}

/// An RNN together with the per-frame standardization it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnClassifier {
    pub model: RnnModel,
    pub norm: Standardizer,
    pub class_names: Vec<String>,
}

impl RnnClassifier {
    pub fn standardize(&self, chunk: &FeatureMatrix) -> Result<FeatureMatrix> {
        if chunk.cols() != self.norm.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.norm.dim(),
                got: chunk.cols(),
            });
        }
        let mut out = chunk.clone();
        for r in 0..out.rows() {
            self.norm.apply_in_place(out.row_mut(r));
        }
        Ok(out)
    }
}

impl ChunkClassifier for RnnClassifier {
    fn n_classes(&self) -> usize {
        self.model.n_classes
    }

    fn chunk_probs(&self, chunk: &FeatureMatrix) -> Result<Vec<f64>> {
        rnn_forward(&self.model, &self.standardize(chunk)?)
    }
}

/// Per-track and per-chunk results of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub track_accuracy: f64,
    pub chunk_accuracy: f64,
    /// `confusion[true][predicted]`, counted over tracks.
    pub confusion: Vec<Vec<usize>>,
    pub track_predictions: Vec<usize>,
}

/// Combines chunk probabilities into one label; ties go to the lower class index.
pub fn aggregate(probs: &[Vec<f64>], n_classes: usize, mode: Aggregation) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::arg("track has no chunks"));
    }
    let mut acc = vec![0.0; n_classes];
    for p in probs {
        match mode {
            Aggregation::ChunkVote => acc[argmax(p)] += 1.0,
            Aggregation::ProbMean => acc.iter_mut().zip(p).for_each(|(a, v)| *a += v),
        }
    }
    Ok(argmax(&acc))
}

/// Scores every track given as `(chunks, true label)`.
pub fn evaluate<M: ChunkClassifier + ?Sized>(
    model: &M,
    tracks: &[(Vec<FeatureMatrix>, usize)],
    mode: Aggregation,
) -> Result<EvalReport> {
    if tracks.is_empty() {
        return Err(Error::arg("no tracks to evaluate"));
    }
    let n = model.n_classes();
    let per_track: Vec<Result<(usize, usize, usize)>> = tracks
        .par_iter()
        .enumerate()
        .map(|(i, (chunks, label))| {
            if chunks.is_empty() {
                return Err(Error::arg(format!("track {i} has no chunks")));
            }
            if *label >= n {
                return Err(Error::arg(format!("track {i} label {label} out of range")));
            }
            let probs = chunks.iter().map(|c| model.chunk_probs(c)).collect::<Result<Vec<_>>>()?;
            let chunk_ok = probs.iter().filter(|p| argmax(p) == *label).count();
            Ok((aggregate(&probs, n, mode)?, chunk_ok, chunks.len()))
        })
        .collect();
    let mut confusion = vec![vec![0usize; n]; n];
    let mut predictions = Vec::with_capacity(tracks.len());
    let (mut correct, mut chunk_ok, mut chunk_total) = (0usize, 0usize, 0usize);
    for ((_, label), r) in tracks.iter().zip(per_track) {
        let (pred, ok, total) = r?;
        confusion[*label][pred] += 1;
        correct += (pred == *label) as usize;
        chunk_ok += ok;
        chunk_total += total;
        predictions.push(pred);
    }
    Ok(EvalReport {
        track_accuracy: correct as f64 / tracks.len() as f64,
        chunk_accuracy: chunk_ok as f64 / chunk_total as f64,
        confusion,
        track_predictions: predictions,
    })
}
