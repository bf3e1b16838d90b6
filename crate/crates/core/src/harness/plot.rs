use std::path::Path;

use crate::error::{Error, Result};
use crate::signal_io::FeatureMatrix;

/// 8-bit binary PGM of a feature matrix: one column per frame, one row per channel with
/// channel 0 at the bottom, values mapped linearly from `[min, max]` onto `[0, 255]`.
/// A constant matrix renders as mid-gray 128.
pub fn plot_bytes(fm: &FeatureMatrix) -> Result<Vec<u8>> {
    if !fm.is_finite() {
        return Err(Error::Numeric("cannot plot non-finite features".into()));
    }
    if fm.rows() == 0 {
        return Err(Error::arg("cannot plot a matrix with no frames"));
    }
    let (lo, hi) = fm
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (width, height) = (fm.rows(), fm.cols());
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    for y in 0..height {
        let k = height - 1 - y;
        for m in 0..width {
            let px = if hi > lo {
                (255.0 * (fm.get(m, k) - lo) / (hi - lo)).round() as u8
            } else {
                128
            };
            out.push(px);
        }
    }
    Ok(out)
}

pub fn emit_plot(fm: &FeatureMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, plot_bytes(fm)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(b: &[u8]) -> &[u8] {
        let mut newlines = 0;
        let start = b
            .iter()
            .position(|&c| {
                newlines += (c == b'\n') as usize;
                newlines == 3
            })
            .unwrap();
        &b[start + 1..]
    }

    #[test]
    fn constant_is_mid_gray() {
        let b = plot_bytes(&FeatureMatrix::new(1, 1, vec![7.0], 1).unwrap()).unwrap();
        assert_eq!(&b[..9], b"P5\n1 1\n25");
        assert_eq!(pixels(&b), &[128]);
    }

    #[test]
    fn linear_levels_low_channel_at_bottom() {
        // frames are rows: frame 0 = [0, 1], frame 1 = [2, 3]
        let fm = FeatureMatrix::new(2, 2, vec![0.0, 1.0, 2.0, 3.0], 1).unwrap();
        let b = plot_bytes(&fm).unwrap();
        assert!(b.starts_with(b"P5\n2 2\n255\n"));
        // top image row is channel 1 over frames 0 and 1, bottom row is channel 0
        assert_eq!(pixels(&b), &[85, 255, 0, 170]);
    }

    #[test]
    fn rejects_nonfinite() {
        let mut fm = FeatureMatrix::zeros(2, 2, 1);
        fm.data_mut()[1] = f64::INFINITY;
        assert!(plot_bytes(&fm).is_err());
    }
}
