//! Seeded four-class synthetic audio set: steady tones, rising and falling exponential
//! chirps across the band, and amplitude-modulated noise, all below about 600 Hz.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal_io::{write_wav_pcm16, DatasetManifest, ManifestEntry, Signal};

/// Class names in sorted order, so label indices match manifest class indices.
pub const SYNTH_CLASSES: [&str; 4] = ["am_noise", "chirp_down", "chirp_up", "tone"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub per_class: usize,
    pub sample_rate: u32,
    pub min_secs: f64,
    pub max_secs: f64,
    /// Tones and chirps stay inside this band, Hz.
    pub band: (f64, f64),
    /// Standard deviation of the white background noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            per_class: 50,
            sample_rate: 44100,
            min_secs: 2.0,
            max_secs: 3.0,
            band: (80.0, 560.0),
            noise: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub name: String,
    pub label: usize,
    pub signal: Signal,
}

/// Number of distinct tone pitches.
const TONE_PITCHES: usize = 8;

/// Chirp sweep rate; a 3 s clip covers 2.5 octaves.
const SWEEP_OCTAVES_PER_SEC: f64 = 2.5 / 3.0;

fn exp_chirp(n: usize, fs: f64, f_start: f64, f_end: f64, amp: f64, phase0: f64) -> Vec<f64> {
    let dur = n as f64 / fs;
    let k = (f_end / f_start).ln();
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let phase = 2.0 * PI * f_start * dur / k * ((k * t / dur).exp() - 1.0);
            amp * (phase + phase0).sin()
        })
        .collect()
}

fn clip(class: usize, n: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fs = cfg.sample_rate as f64;
    let (lo, hi) = cfg.band;
    let amp = rng.gen_range(0.3..0.6);
    let phase0 = rng.gen_range(0.0..2.0 * PI);
    let mut x = match class {
        0 => {
            let rate = rng.gen_range(2.0..8.0);
            let depth = rng.gen_range(0.6..0.95);
            let mod_phase = rng.gen_range(0.0..2.0 * PI);
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let env = 1.0 + depth * (2.0 * PI * rate * t + mod_phase).sin();
                    0.5 * amp * env * rng.sample::<f64, _>(StandardNormal)
                })
                .collect()
        }
        1 | 2 => {
            // fixed sweep rate so that clips of any length trace the same path; the start
            // is jittered by up to a quarter octave from the band edge
            let octaves = SWEEP_OCTAVES_PER_SEC * n as f64 / fs;
            let jitter = 2f64.powf(rng.gen_range(0.0..0.25));
            let (a, b) = if class == 2 {
                (lo * jitter, lo * jitter * 2f64.powf(octaves))
            } else {
                (hi / jitter, hi / jitter / 2f64.powf(octaves))
            };
            exp_chirp(n, fs, a, b, amp, phase0)
        }
        _ => {
            // one of a few pitches a major third apart, starting at the band edge
            let f = lo * 2f64.powf((4 * rng.gen_range(0..TONE_PITCHES)) as f64 / 12.0);
            (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs + phase0).sin()).collect()
        }
    };
    for v in x.iter_mut() {
        *v = (*v + cfg.noise * rng.sample::<f64, _>(StandardNormal)).clamp(-1.0, 1.0);
    }
    x
}

/// Generates `per_class` clips per class, interleaved by class.
pub fn synth_dataset(cfg: &SynthConfig) -> Result<Vec<SynthClip>> {
    if cfg.per_class == 0 || !(cfg.min_secs > 0.0 && cfg.min_secs <= cfg.max_secs) {
        return Err(Error::arg("synthetic set needs per_class >= 1 and 0 < min_secs <= max_secs"));
    }
    let (lo, hi) = cfg.band;
    if !(lo > 0.0 && lo * 2f64.powf(2.75) <= hi && hi < cfg.sample_rate as f64 / 2.0) {
        return Err(Error::arg("synthetic band must span 2.75 octaves below half the sample rate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(4 * cfg.per_class);
    for i in 0..cfg.per_class {
        for (label, name) in SYNTH_CLASSES.iter().enumerate() {
            let secs = rng.gen_range(cfg.min_secs..=cfg.max_secs);
            let n = (secs * cfg.sample_rate as f64).round() as usize;
            let x = clip(label, n, cfg, &mut rng);
            out.push(SynthClip {
                name: format!("{name}_{i:03}"),
                label,
                signal: Signal::new(x, cfg.sample_rate)?,
            });
        }
    }
    Ok(out)
}

/// Writes the clips as 16-bit WAV files plus a `manifest.tsv` into `dir`.
pub fn write_synth_dataset(dir: &Path, clips: &[SynthClip]) -> Result<DatasetManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(clips.len());
    for c in clips {
        let file = format!("{}.wav", c.name);
        write_wav_pcm16(dir.join(&file), &c.signal)?;
        entries.push(ManifestEntry {
            path: file,
            label: SYNTH_CLASSES[c.label].to_string(),
        });
    }
    let manifest = DatasetManifest::new(dir, entries)?;
    let path = dir.join("manifest.tsv");
    std::fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
