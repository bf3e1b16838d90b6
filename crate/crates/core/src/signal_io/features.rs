//! Feature matrices and the `ADF1` binary container.
//!
//! Layout (little-endian): magic `ADF1`, `u32` rows, `u32` cols, `u32` frame hop,
//! `u8` has-frequencies flag, optionally `cols` f64 center frequencies, then
//! `rows * cols` f64 values in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"ADF1";
pub const FEATURE_HEADER_LEN: usize = 17;

/// Real matrix indexed `(frame, channel)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// Frame step in input samples.
    pub frame_hop: u32,
    /// Optional center frequency (Hz) of each column.
    pub center_freqs: Option<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, frame_hop: u32) -> Result<Self> {
        if cols == 0 {
            return Err(Error::arg("feature matrix needs at least one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite feature value {} at frame {}, channel {}",
                data[i],
                i / cols,
                i % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            frame_hop,
            center_freqs: None,
        })
    }

    pub fn zeros(rows: usize, cols: usize, frame_hop: u32) -> Self {
        assert!(cols > 0, "feature matrix needs at least one column");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            frame_hop,
            center_freqs: None,
        }
    }

    /// Builds a matrix from row vectors that all share the same length.
    pub fn from_rows(rows: &[Vec<f64>], frame_hop: u32) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat(), frame_hop)
    }

    pub fn with_center_freqs(mut self, freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: freqs.len(),
            });
        }
        self.center_freqs = Some(freqs);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, m: usize, k: usize) -> f64 {
        self.data[m * self.cols + k]
    }

    #[inline]
    pub fn set(&mut self, m: usize, k: usize, v: f64) {
        self.data[m * self.cols + k] = v;
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.data[m * self.cols..(m + 1) * self.cols]
    }

    /// Column `k` as an owned time series.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.rows).map(|m| self.get(m, k)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n_freqs = self.center_freqs.as_ref().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(FEATURE_HEADER_LEN + 8 * (n_freqs + self.data.len()));
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        out.extend_from_slice(&self.frame_hop.to_le_bytes());
        match &self.center_freqs {
            Some(freqs) => {
                out.push(1);
                for f in freqs {
                    out.extend_from_slice(&f.to_le_bytes());
                }
            }
            None => out.push(0),
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[0..4] != FEATURE_MAGIC {
            return Err(Error::Format("bad feature file magic".into()));
        }
        if bytes.len() < FEATURE_HEADER_LEN {
            return Err(Error::Length {
                expected: FEATURE_HEADER_LEN,
                found: bytes.len(),
            });
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let rows = u32_at(4) as usize;
        let cols = u32_at(8) as usize;
        let frame_hop = u32_at(12);
        let has_freqs = match bytes[16] {
            0 => false,
            1 => true,
            f => return Err(Error::Format(format!("bad frequency flag {f}"))),
        };
        if cols == 0 {
            return Err(Error::Format("feature file declares zero columns".into()));
        }
        let n_freqs = if has_freqs { cols } else { 0 };
        let expected = FEATURE_HEADER_LEN + 8 * (n_freqs + rows * cols);
        if bytes.len() < expected {
            return Err(Error::Length {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(Error::Format(format!(
                "{} trailing bytes after payload",
                bytes.len() - expected
            )));
        }
        let mut values = bytes[FEATURE_HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let freqs: Vec<f64> = values.by_ref().take(n_freqs).collect();
        let data: Vec<f64> = values.collect();
        let fm = Self::new(rows, cols, data, frame_hop)?;
        if has_freqs {
            fm.with_center_freqs(freqs)
        } else {
            Ok(fm)
        }
    }
}

pub fn write_features(path: impl AsRef<Path>, fm: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    if !fm.is_finite() {
        return Err(Error::Numeric("refusing to write non-finite features".into()));
    }
    fs::write(path, fm.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureMatrix::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_is_header_only() {
        let fm = FeatureMatrix::zeros(0, 3, 128);
        let bytes = fm.to_bytes();
        assert_eq!(bytes.len(), 17);
        assert_eq!(FeatureMatrix::from_bytes(&bytes).unwrap(), fm);
    }

    #[test]
    fn small_round_trip() {
        let fm = FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(FeatureMatrix::from_bytes(&fm.to_bytes()).unwrap(), fm);
    }

    #[test]
    fn subnormal_and_negative_zero_are_bit_exact() {
        let fm = FeatureMatrix::new(1, 3, vec![1e-300, -0.0, 5e-324], 7)
            .unwrap()
            .with_center_freqs(vec![40.0, -0.0, 1e-300])
            .unwrap();
        let back = FeatureMatrix::from_bytes(&fm.to_bytes()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.data()), bits(fm.data()));
        assert_eq!(
            bits(back.center_freqs.as_ref().unwrap()),
            bits(fm.center_freqs.as_ref().unwrap())
        );
        // independent byte-level check of the payload
        let bytes = fm.to_bytes();
        let payload = &bytes[17 + 24..];
        assert_eq!(&payload[0..8], &1e-300f64.to_le_bytes());
        assert_eq!(&payload[8..16], &[0, 0, 0, 0, 0, 0, 0, 0x80]);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let fm = FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let mut bytes = fm.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(FeatureMatrix::from_bytes(&bytes), Err(Error::Format(_))));
        let bytes = fm.to_bytes();
        assert!(matches!(
            FeatureMatrix::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Length { .. })
        ));
        assert!(matches!(
            FeatureMatrix::from_bytes(&bytes[..10]),
            Err(Error::Length { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(FeatureMatrix::new(1, 2, vec![1.0, f64::NAN], 1).is_err());
        assert!(FeatureMatrix::new(1, 0, vec![], 1).is_err());
    }
}
