use crate::error::{Error, Result};
use crate::signal_io::FeatureMatrix;

/// Splits a track's frames into fixed-length overlapping chunks.
///
/// Chunks start every `chunk_len - overlap` frames and stop once a chunk reaches the last
/// frame. A trailing chunk shorter than `chunk_len` is zero-padded when it holds at least
/// half a chunk of real frames and dropped otherwise; the first chunk is always kept, so
/// a very short track yields one mostly padded chunk.
pub fn chunk_sequence(fm: &FeatureMatrix, chunk_len: usize, overlap: usize) -> Result<Vec<FeatureMatrix>> {
    if chunk_len == 0 || overlap >= chunk_len {
        return Err(Error::arg(format!(
            "need 0 <= overlap < chunk_len, got overlap={overlap}, chunk_len={chunk_len}"
        )));
    }
    if fm.rows() == 0 {
        return Err(Error::arg("cannot chunk an empty feature matrix"));
    }
    let step = chunk_len - overlap;
    let dim = fm.cols();
    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let real = chunk_len.min(fm.rows() - start);
        if real < chunk_len && 2 * real < chunk_len && !chunks.is_empty() {
            break;
        }
        let mut data = vec![0.0; chunk_len * dim];
        data[..real * dim].copy_from_slice(&fm.data()[start * dim..(start + real) * dim]);
        chunks.push(FeatureMatrix::new(chunk_len, dim, data, fm.frame_hop)?);
        if start + chunk_len >= fm.rows() {
            break;
        }
        start += step;
    }
    Ok(chunks)
}

/// Chunks of many tracks with their provenance.
#[derive(Debug, Clone, Default)]
pub struct ChunkSet {
    pub chunks: Vec<FeatureMatrix>,
    /// Index into `track_labels` for every chunk.
    pub track_ids: Vec<usize>,
    pub track_labels: Vec<usize>,
}

impl ChunkSet {
    pub fn from_tracks(
        tracks: &[(&FeatureMatrix, usize)],
        chunk_len: usize,
        overlap: usize,
    ) -> Result<Self> {
        let mut set = ChunkSet::default();
        for (id, (fm, label)) in tracks.iter().enumerate() {
            for c in chunk_sequence(fm, chunk_len, overlap)? {
                set.chunks.push(c);
                set.track_ids.push(id);
            }
            set.track_labels.push(*label);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk_label(&self, i: usize) -> usize {
        self.track_labels[self.track_ids[i]]
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.chunk_label(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize) -> FeatureMatrix {
        FeatureMatrix::new(n, 2, (0..2 * n).map(|v| v as f64 + 1.0).collect(), 1).unwrap()
    }

    #[test]
    fn hundred_frames_three_chunks() {
        let c = chunk_sequence(&frames(100), 60, 30).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].get(0, 0), frames(100).get(30, 0));
        assert_eq!(c[2].get(0, 0), frames(100).get(60, 0));
        assert!(c[2].row(39).iter().all(|v| *v != 0.0));
        assert!(c[2].row(40).iter().all(|v| *v == 0.0));
        assert!(c.iter().all(|m| m.rows() == 60));
    }

    #[test]
    fn exact_length_single_chunk() {
        assert_eq!(chunk_sequence(&frames(60), 60, 30).unwrap().len(), 1);
    }

    #[test]
    fn short_trailing_part_dropped() {
        // without overlap the chunk at 40 would hold 5 real frames
        assert_eq!(chunk_sequence(&frames(45), 40, 0).unwrap().len(), 1);
        assert_eq!(chunk_sequence(&frames(60), 40, 0).unwrap().len(), 2);
        assert_eq!(chunk_sequence(&frames(59), 40, 0).unwrap().len(), 1);
        assert_eq!(chunk_sequence(&frames(45), 40, 20).unwrap().len(), 2);
    }

    #[test]
    fn very_short_track_one_padded_chunk() {
        let c = chunk_sequence(&frames(5), 40, 20).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].rows(), 40);
        assert!(c[0].row(5).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn errors() {
        assert!(chunk_sequence(&FeatureMatrix::zeros(0, 2, 1), 40, 20).is_err());
        assert!(chunk_sequence(&frames(10), 40, 40).is_err());
        assert!(chunk_sequence(&frames(10), 0, 0).is_err());
    }
}
