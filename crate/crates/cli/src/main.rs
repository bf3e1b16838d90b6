//! `adctnet` command-line tool: feature extraction, training, evaluation, full
//! experiments, feature plots and numerical self-checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adctnet::classifiers::{evaluate, load_model, save_model, Aggregation};
use adctnet::error::{Error, Result};
use adctnet::harness::{
    chunk_tracks, emit_plot, extract_manifest, run_experiment, run_selftests, synth_dataset, train_model,
    write_synth_dataset, ClassifierConfig, ClassifierKind, ExperimentConfig, FeatureCache, FeatureConfig,
    FeatureKind, FeatureSet, SynthConfig, TrackFeatures,
};
use adctnet::signal_io::{load_manifest, read_features};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adctnet", version, about = "DCTNet and adaptive DCTNet audio features and classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features for every track of a manifest into a directory.
    Extract(ExtractArgs),
    /// Train a classifier on all tracks of an extracted feature directory.
    Train(TrainArgs),
    /// Evaluate a saved model on an extracted feature directory.
    Eval(EvalArgs),
    /// Run the repeated-split experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Render a feature file as a grayscale PGM image.
    Plot(PlotArgs),
    /// Run the built-in numerical checks.
    Selftest,
    /// Write the seeded four-class synthetic dataset (WAV files plus manifest.tsv).
    Synth(SynthArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "adctnet")]
    feature: FeatureKind,
    #[arg(long)]
    fmin: Option<f64>,
    #[arg(long)]
    fmax: Option<f64>,
    /// Channels per octave of the first adaptive layer.
    #[arg(long)]
    b1: Option<u32>,
    /// Channels per octave of the second adaptive layer.
    #[arg(long)]
    b2: Option<u32>,
    /// Baseline spectrogram window; also the first-layer window of dctnet.
    #[arg(long)]
    win: Option<usize>,
    /// Baseline spectrogram hop; also the first-layer hop of both cascades.
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long)]
    nfilters: Option<usize>,
    #[arg(long)]
    chunk_len: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Optional TOML file with a full feature section; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value = "svm")]
    classifier: ClassifierKind,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Vote,
    Mean,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "mean")]
    agg: AggArg,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Directory for cached feature files, reused across runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    feature_file: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn feature_config(a: &ExtractArgs) -> Result<FeatureConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            toml::from_str::<FeatureConfig>(&text)
                .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?
        }
        None => FeatureConfig::default(),
    };
    cfg.kind = a.feature;
    cfg.fmin = a.fmin.or(cfg.fmin);
    cfg.fmax = a.fmax.or(cfg.fmax);
    if let Some(v) = a.b1 {
        cfg.b1 = v;
    }
    if let Some(v) = a.b2 {
        cfg.b2 = v;
    }
    if let Some(v) = a.win {
        cfg.win = v;
        cfg.win1 = v;
    }
    if let Some(v) = a.hop {
        cfg.hop = v;
        cfg.hop1 = v;
    }
    if let Some(v) = a.nfilters {
        cfg.nfilters = v;
    }
    if let Some(v) = a.chunk_len {
        cfg.chunk_len = v;
    }
    if let Some(v) = a.overlap {
        cfg.overlap = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let cfg = feature_config(a)?;
    let manifest = load_manifest(&a.manifest)?;
    let tracks = extract_manifest(&manifest, &cfg, &FeatureCache::in_memory())?;
    if let Some(t) = tracks.iter().find(|t| !t.features.is_finite()) {
        return Err(Error::Numeric(format!("non-finite features for {}", t.source)));
    }
    let set = FeatureSet {
        config: cfg,
        class_names: manifest.class_names.clone(),
        tracks,
    };
    set.save(&a.out)?;
    let first = &set.tracks[0].features;
    println!(
        "extracted {} tracks ({} features, {} channels) to {}",
        set.tracks.len(),
        set.config.kind,
        first.cols(),
        a.out.display()
    );
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let set = FeatureSet::load(&a.features)?;
    let d = ClassifierConfig::default();
    let cfg = ClassifierConfig {
        kind: a.classifier,
        lambda: a.lambda.unwrap_or(d.lambda),
        epochs: a.epochs,
        lr: a.lr.unwrap_or(d.lr),
        hidden: a.hidden.unwrap_or(d.hidden),
        seed: a.seed.unwrap_or(d.seed),
        ..d
    };
    let tracks: Vec<&TrackFeatures> = set.tracks.iter().collect();
    let (model, history) = train_model(&tracks, &set.class_names, set.config.chunk_len, set.config.overlap, &cfg, 0)?;
    save_model(&a.model, &model)?;
    let label = match cfg.kind {
        ClassifierKind::Svm => "objective",
        ClassifierKind::Rnn => "loss",
    };
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        println!("{label}: {first:.6} -> {last:.6} over {} epochs", history.len() - 1);
    }
    println!("saved {} model to {}", model.kind_name(), a.model.display());
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let set = FeatureSet::load(&a.features)?;
    let model = load_model(&a.model)?;
    if model.class_names() != set.class_names.as_slice() {
        return Err(Error::Format(format!(
            "model classes {:?} differ from feature classes {:?}",
            model.class_names(),
            set.class_names
        )));
    }
    let tracks: Vec<&TrackFeatures> = set.tracks.iter().collect();
    let chunks = chunk_tracks(&tracks, set.config.chunk_len, set.config.overlap)?;
    let mode = match a.agg {
        AggArg::Vote => Aggregation::ChunkVote,
        AggArg::Mean => Aggregation::ProbMean,
    };
    let r = evaluate(&model, &chunks, mode)?;
    println!("tracks: {}", tracks.len());
    println!("track accuracy ({mode}): {:.4}", r.track_accuracy);
    println!("chunk accuracy: {:.4}", r.chunk_accuracy);
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let manifest = load_manifest(&a.manifest)?;
    let cache = match &a.cache_dir {
        Some(dir) => FeatureCache::on_disk(dir)?,
        None => FeatureCache::in_memory(),
    };
    let report = run_experiment(&cfg, &manifest, &cache)?;
    write_text(&a.out, &report.to_text())?;
    let (m, sd) = report.track_accuracy();
    println!("track accuracy: {:.2} +- {:.2} % ({} repeats)", 100.0 * m, 100.0 * sd, report.repeats.len());
    Ok(())
}

fn plot(a: &PlotArgs) -> Result<()> {
    emit_plot(&read_features(&a.feature_file)?, &a.out)
}

fn selftest() -> Result<bool> {
    let results = run_selftests()?;
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let clips = synth_dataset(&SynthConfig {
        per_class: a.per_class,
        seed: a.seed,
        ..Default::default()
    })?;
    write_synth_dataset(&a.out, &clips)?;
    println!("wrote {} clips and manifest.tsv to {}", clips.len(), a.out.display());
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn exit_code(e: &Error) -> u8 {
    if e.is_usage() {
        1
    } else if e.is_numeric() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot(a),
        Command::Selftest => match selftest() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
