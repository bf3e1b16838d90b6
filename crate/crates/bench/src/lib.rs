//! Shared inputs for the benchmarks.

use std::f64::consts::PI;

/// Linear chirp from 100 Hz to `fs / 4` plus a weak 1 kHz tone, `n` samples at `fs`.
pub fn bench_signal(n: usize, fs: f64) -> Vec<f64> {
    let dur = n as f64 / fs;
    let rate = (fs / 4.0 - 100.0) / dur;
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            0.5 * (2.0 * PI * (100.0 * t + 0.5 * rate * t * t)).sin() + 0.1 * (2.0 * PI * 1000.0 * t).sin()
        })
        .collect()
}
