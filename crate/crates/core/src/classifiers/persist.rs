//! "ADM1" model container.
//!
//! Layout (little-endian): magic `ADM1`, kind byte (0 linear, 1 rnn), u32 dimensions,
//! f64 parameter blocks, then the class names as u32 length + UTF-8 bytes each.
//!
//! * linear: dims `n_classes, dim`; blocks `W, b, mean, scale`.
//! * rnn: dims `input_dim, hidden, n_classes`; blocks `W_in, W_rec, b_h, V, b_y, mean, scale`.

use std::path::Path;

use super::evaluate::{ChunkClassifier, RnnClassifier};
use super::rnn::RnnModel;
use super::standardize::Standardizer;
use super::svm::LinearModel;
use crate::error::{Error, Result};
use crate::signal_io::FeatureMatrix;

pub const MODEL_MAGIC: &[u8; 4] = b"ADM1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Rnn(RnnClassifier),
}

impl Model {
    pub fn class_names(&self) -> &[String] {
        match self {
            Model::Linear(m) => &m.class_names,
            Model::Rnn(m) => &m.class_names,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Linear(_) => "svm",
            Model::Rnn(_) => "rnn",
        }
    }

    /// Per-frame feature dimension the model expects.
    pub fn frame_dim(&self, chunk_len: usize) -> usize {
        match self {
            Model::Linear(m) => m.dim() / chunk_len.max(1),
            Model::Rnn(m) => m.model.input_dim,
        }
    }
}

impl ChunkClassifier for Model {
    fn n_classes(&self) -> usize {
        self.class_names().len()
    }

    fn chunk_probs(&self, chunk: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Model::Linear(m) => m.chunk_probs(chunk),
            Model::Rnn(m) => m.chunk_probs(chunk),
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")))?;
        self.0.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }

    fn block(&mut self, vals: &[f64]) {
        for v in vals {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn names(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            self.u32(n.len())?;
            self.0.extend_from_slice(n.as_bytes());
        }
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len()).ok_or(Error::Length {
            expected: self.pos.saturating_add(n),
            found: self.buf.len(),
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn block(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("block too large".into()))?)?;
        let vals: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite model parameter".into()));
        }
        Ok(vals)
    }

    fn names(&mut self, n: usize) -> Result<Vec<String>> {
        (0..n)
            .map(|_| {
                let len = self.u32()?;
                String::from_utf8(self.take(len)?.to_vec())
                    .map_err(|_| Error::Format("class name is not UTF-8".into()))
            })
            .collect()
    }
}

pub fn model_to_bytes(model: &Model) -> Result<Vec<u8>> {
    let mut w = Writer(MODEL_MAGIC.to_vec());
    match model {
        Model::Linear(m) => {
            w.0.push(0);
            w.u32(m.n_classes())?;
            w.u32(m.dim())?;
            for row in &m.weights {
                w.block(row);
            }
            w.block(&m.bias);
            w.block(&m.norm.mean);
            w.block(&m.norm.scale);
            w.names(&m.class_names)?;
        }
        Model::Rnn(c) => {
            let m = &c.model;
            w.0.push(1);
            w.u32(m.input_dim)?;
            w.u32(m.hidden)?;
            w.u32(m.n_classes)?;
            for b in m.blocks() {
                w.block(b);
            }
            w.block(&c.norm.mean);
            w.block(&c.norm.scale);
            w.names(&c.class_names)?;
        }
    }
    Ok(w.0)
}

pub fn model_from_bytes(buf: &[u8]) -> Result<Model> {
    if buf.len() < 5 || &buf[..4] != MODEL_MAGIC {
        return Err(Error::Format("not an ADM1 model file (bad magic)".into()));
    }
    let mut r = Reader { buf, pos: 5 };
    let model = match buf[4] {
        0 => {
            let (c, d) = (r.u32()?, r.u32()?);
            let weights = (0..c).map(|_| r.block(d)).collect::<Result<Vec<_>>>()?;
            let bias = r.block(c)?;
            let norm = Standardizer {
                mean: r.block(d)?,
                scale: r.block(d)?,
            };
            let class_names = r.names(c)?;
            Model::Linear(LinearModel {
                weights,
                bias,
                norm,
                class_names,
            })
        }
        1 => {
            let (d, h, c) = (r.u32()?, r.u32()?, r.u32()?);
            let model = RnnModel {
                input_dim: d,
                hidden: h,
                n_classes: c,
                w_in: r.block(h * d)?,
                w_rec: r.block(h * h)?,
                b_h: r.block(h)?,
                v: r.block(c * h)?,
                b_y: r.block(c)?,
            };
            let norm = Standardizer {
                mean: r.block(d)?,
                scale: r.block(d)?,
            };
            let class_names = r.names(c)?;
            Model::Rnn(RnnClassifier {
                model,
                norm,
                class_names,
            })
        }
        k => return Err(Error::Format(format!("unknown model kind byte {k}"))),
    };
    if r.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes after model", buf.len() - r.pos)));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    std::fs::write(path, model_to_bytes(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    model_from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
