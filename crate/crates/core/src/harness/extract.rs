use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{FeatureConfig, FeatureKind};
use crate::adaptive::adctnet_two_layer;
use crate::baselines::{apply_filterbank, make_tri_filterbank, power_spectrogram, FilterScale, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::signal_io::{decode_wav, read_features, write_features, DatasetManifest, FeatureMatrix, Signal};
use crate::stdct::{dctnet_forward, log_compress, pool_energy, StdctConfig};

/// Frame-by-channel features of one signal.
pub fn extract_features(signal: &Signal, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    let fs = signal.sample_rate as f64;
    let x = &signal.samples;
    let scale = match cfg.kind {
        FeatureKind::Adctnet => {
            let (l1, l2) = cfg.adct_params().layer_configs(fs)?;
            return finish(adctnet_two_layer(x, &l1, &l2)?, cfg);
        }
        FeatureKind::Dctnet => {
            let l1 = StdctConfig::new(cfg.win1, cfg.hop1, cfg.window);
            let l2 = StdctConfig::new(cfg.win2, cfg.hop2, cfg.window);
            return finish(pool_energy(&dctnet_forward(x, &l1, &l2)?), cfg);
        }
        FeatureKind::Mfsc => FilterScale::Mel,
        FeatureKind::Lfsc => FilterScale::Linear,
        FeatureKind::Erb => FilterScale::Erb,
    };
    let spec = power_spectrogram(x, fs, cfg.win, cfg.hop, cfg.window)?;
    let fmin = cfg.fmin.unwrap_or(0.0);
    let fmax = cfg.fmax.unwrap_or(fs / 2.0).min(fs / 2.0);
    let fb = make_tri_filterbank(scale, cfg.nfilters, fmin, fmax, fs, spec.cols())?;
    let centers = fb.centers.clone();
    apply_filterbank(&spec, &fb)?.with_center_freqs(centers)
}

fn finish(fm: FeatureMatrix, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    if cfg.log {
        log_compress(&fm, LOG_FLOOR)
    } else {
        Ok(fm)
    }
}

/// SHA-256 of the audio bytes followed by the canonical feature configuration.
pub fn cache_key(audio: &[u8], cfg: &FeatureConfig) -> String {
    let mut h = Sha256::new();
    h.update(audio);
    h.update(b"\0features\0");
    h.update(cfg.canonical().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Content-addressed feature store, in memory and optionally on disk.
#[derive(Debug, Default)]
pub struct FeatureCache {
    dir: Option<PathBuf>,
    mem: Mutex<HashMap<String, FeatureMatrix>>,
}

impl FeatureCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir: Some(dir),
            mem: Mutex::default(),
        })
    }

    fn disk_path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.adf")))
    }

    pub fn len(&self) -> usize {
        self.mem.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Features for an audio file, computed at most once per (bytes, config).
    pub fn get_or_extract(&self, path: &Path, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let key = cache_key(&bytes, cfg);
        if let Some(fm) = self.mem.lock().expect("cache lock").get(&key) {
            return Ok(fm.clone());
        }
        let disk = self.disk_path(&key);
        let fm = match disk.as_ref().filter(|p| p.exists()) {
            Some(p) => read_features(p)?,
            None => {
                let fm = decode_wav(&bytes).and_then(|s| extract_features(&s, cfg));
                let fm = fm.map_err(|e| Error::Extraction {
                    path: path.to_path_buf(),
                    source: Box::new(e),
                })?;
                if let Some(p) = &disk {
                    write_features(p, &fm)?;
                }
                fm
            }
        };
        self.mem.lock().expect("cache lock").insert(key, fm.clone());
        Ok(fm)
    }
}

/// Features of one manifest track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackFeatures {
    pub source: String,
    pub label: usize,
    pub features: FeatureMatrix,
}

/// Extracts every manifest entry in parallel, preserving manifest order.
pub fn extract_manifest(
    manifest: &DatasetManifest,
    cfg: &FeatureConfig,
    cache: &FeatureCache,
) -> Result<Vec<TrackFeatures>> {
    cfg.validate()?;
    let labels = manifest.labels();
    manifest
        .entries
        .par_iter()
        .zip(labels.par_iter())
        .map(|(entry, &label)| {
            let features = cache.get_or_extract(&manifest.resolve(entry), cfg)?;
            Ok(TrackFeatures {
                source: entry.path.clone(),
                label,
                features,
            })
        })
        .collect()
}
