//! Directory of extracted features: `features.toml` (config and class names),
//! `index.tsv` (feature file, label, source audio) and one `.adf` file per track.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::FeatureConfig;
use super::extract::TrackFeatures;
use crate::error::{Error, Result};
use crate::signal_io::{read_features, write_features};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub config: FeatureConfig,
    pub class_names: Vec<String>,
    pub tracks: Vec<TrackFeatures>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    class_names: Vec<String>,
    feature: FeatureConfig,
}

pub const INDEX_FILE: &str = "index.tsv";
pub const HEADER_FILE: &str = "features.toml";

impl FeatureSet {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let header = Header {
            class_names: self.class_names.clone(),
            feature: self.config.clone(),
        };
        let text = toml::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
        let hp = dir.join(HEADER_FILE);
        std::fs::write(&hp, text).map_err(|e| Error::io(&hp, e))?;
        let mut index = String::from("# file\tlabel\tsource\n");
        for (i, t) in self.tracks.iter().enumerate() {
            let file = format!("{i:06}.adf");
            write_features(dir.join(&file), &t.features)?;
            index.push_str(&format!("{file}\t{}\t{}\n", self.class_names[t.label], t.source));
        }
        let ip = dir.join(INDEX_FILE);
        std::fs::write(&ip, index).map_err(|e| Error::io(&ip, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let hp = dir.join(HEADER_FILE);
        let text = std::fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
        let header: Header =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", hp.display())))?;
        let ip = dir.join(INDEX_FILE);
        let index = std::fs::read_to_string(&ip).map_err(|e| Error::io(&ip, e))?;
        let mut tracks = Vec::new();
        for (n, line) in index.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let label = header.class_names.iter().position(|c| c == fields[1]).ok_or_else(|| Error::Parse {
                line: n + 1,
                msg: format!("unknown class '{}'", fields[1]),
            })?;
            tracks.push(TrackFeatures {
                source: fields[2].to_string(),
                label,
                features: read_features(dir.join(fields[0]))?,
            });
        }
        if tracks.is_empty() {
            return Err(Error::Format(format!("{} lists no tracks", ip.display())));
        }
        Ok(Self {
            config: header.feature,
            class_names: header.class_names,
            tracks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::FeatureMatrix;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let set = FeatureSet {
            config: FeatureConfig { chunk_len: 7, ..Default::default() },
            class_names: vec!["a".into(), "b".into()],
            tracks: (0..3)
                .map(|i| TrackFeatures {
                    source: format!("x/{i}.wav"),
                    label: i % 2,
                    features: FeatureMatrix::new(2, 2, vec![i as f64, 1.0, 2.0, 3.0], 4)
                        .unwrap()
                        .with_center_freqs(vec![10.0, 20.0])
                        .unwrap(),
                })
                .collect(),
        };
        set.save(dir.path()).unwrap();
        assert_eq!(FeatureSet::load(dir.path()).unwrap(), set);
        std::fs::write(dir.path().join(INDEX_FILE), "000000.adf\tzzz\tq\n").unwrap();
        assert!(matches!(FeatureSet::load(dir.path()), Err(Error::Parse { line: 1, .. })));
    }
}
