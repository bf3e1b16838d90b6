//! Property tests over randomized inputs.

use adctnet::classifiers::{
    chunk_sequence, model_from_bytes, model_to_bytes, softmax, svm_predict, svm_train, LinearModel, Model,
    SvmConfig,
};
use adctnet::filterbanks::cq_frequency_grid;
use adctnet::harness::stratified_split;
use adctnet::signal_io::{decode_wav, encode_wav_pcm16};
use adctnet::{dctnet_forward, pool_energy, FeatureMatrix, Signal, StdctConfig, WindowKind};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

fn window_kind() -> impl Strategy<Value = WindowKind> {
    prop_oneof![Just(WindowKind::Hamming), Just(WindowKind::Hann), Just(WindowKind::Rectangular)]
}

/// Signal length and a matching two-layer configuration that yields at least one frame.
fn cascade() -> impl Strategy<Value = (usize, StdctConfig, StdctConfig)> {
    (2usize..=16, 1usize..=8, 2usize..=8, 1usize..=4, window_kind(), window_kind(), 0usize..40).prop_map(
        |(n1, h1, n2, h2, w1, w2, extra)| {
            let h1 = h1.min(n1);
            let h2 = h2.min(n2);
            let len = n1 + h1 * (n2 - 1) + extra;
            (len, StdctConfig::new(n1, h1, w1), StdctConfig::new(n2, h2, w2))
        },
    )
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feature_bytes_round_trip(rows in 1usize..12, cols in 1usize..9, hop in 1u32..4096, seed in any::<u64>(), with_freqs in any::<bool>()) {
        let data: Vec<f64> = (0..rows * cols).map(|i| ((seed.wrapping_mul(i as u64 + 1)) % 10007) as f64 / 7.0 - 700.0).collect();
        let mut fm = FeatureMatrix::new(rows, cols, data, hop).unwrap();
        if with_freqs {
            fm = fm.with_center_freqs((0..cols).map(|k| 40.0 * (k + 1) as f64).collect()).unwrap();
        }
        let back = FeatureMatrix::from_bytes(&fm.to_bytes()).unwrap();
        prop_assert_eq!(back, fm);
    }

    #[test]
    fn linear_model_bytes_round_trip(dim in 1usize..6, classes in 2usize..5, seed in any::<u32>()) {
        let v = |i: usize| ((seed as usize * 31 + i * 17) % 101) as f64 / 10.0 - 5.0;
        let model = Model::Linear(LinearModel {
            weights: (0..classes).map(|c| (0..dim).map(|d| v(c * dim + d)).collect()).collect(),
            bias: (0..classes).map(|c| v(1000 + c)).collect(),
            norm: adctnet::classifiers::Standardizer { mean: (0..dim).map(|d| v(50 + d)).collect(), scale: vec![2.0; dim] },
            class_names: (0..classes).map(|c| format!("class {c}")).collect(),
        });
        let bytes = model_to_bytes(&model).unwrap();
        prop_assert_eq!(model_from_bytes(&bytes).unwrap(), model);
        prop_assert!(model_from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn pre_pooling_map_is_linear(
        (len, l1, l2) in cascade(),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        xs in prop::collection::vec(finite(), 120),
        ys in prop::collection::vec(finite(), 120),
    ) {
        let x = &xs[..len];
        let y = &ys[..len];
        let mix: Vec<f64> = x.iter().zip(y).map(|(u, v)| a * u + b * v).collect();
        let tx = dctnet_forward(x, &l1, &l2).unwrap();
        let ty = dctnet_forward(y, &l1, &l2).unwrap();
        let tm = dctnet_forward(&mix, &l1, &l2).unwrap();
        let scale = 1.0 + max_abs(tx.data.iter().chain(&ty.data).copied());
        let err = max_abs(tm.data.iter().zip(tx.data.iter().zip(&ty.data)).map(|(m, (u, v))| m - (a * u + b * v)));
        prop_assert!(err <= 1e-10 * scale, "err {err}, scale {scale}");
    }

    #[test]
    fn pooled_energy_is_quadratic_and_non_negative(
        (len, l1, l2) in cascade(),
        alpha in prop_oneof![Just(-2.0), Just(0.5), Just(3.0), -10.0..10.0f64],
        xs in prop::collection::vec(finite(), 120),
    ) {
        let x = &xs[..len];
        let f = pool_energy(&dctnet_forward(x, &l1, &l2).unwrap());
        let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let g = pool_energy(&dctnet_forward(&scaled, &l1, &l2).unwrap());
        prop_assert!(f.data().iter().all(|v| *v >= 0.0));
        let scale = max_abs(f.data().iter().copied()).max(1e-300);
        let err = max_abs(g.data().iter().zip(f.data()).map(|(u, v)| u - alpha * alpha * v));
        prop_assert!(err <= 1e-10 * alpha * alpha * scale + 1e-300, "err {err}");
    }

    #[test]
    fn pcm16_matches_reference_reader(samples in prop::collection::vec(-1.2..1.2f64, 1..300), rate in 1000u32..96000) {
        let signal = Signal::new(samples.clone(), rate).unwrap();
        let bytes = encode_wav_pcm16(&signal);
        let mut reader = hound::WavReader::new(std::io::Cursor::new(&bytes)).unwrap();
        let spec = reader.spec();
        prop_assert_eq!((spec.channels, spec.sample_rate, spec.bits_per_sample), (1, rate, 16));
        let reference: Vec<i16> = reader.samples::<i16>().map(Result::unwrap).collect();
        prop_assert_eq!(reference.len(), samples.len());
        for (q, s) in reference.iter().zip(&samples) {
            prop_assert_eq!(*q as f64, (s * 32768.0).round().clamp(-32768.0, 32767.0));
        }
        let decoded = decode_wav(&bytes).unwrap();
        prop_assert_eq!(decoded.sample_rate, rate);
        for (d, q) in decoded.samples.iter().zip(&reference) {
            prop_assert_eq!(*d, *q as f64 / 32768.0);
        }
    }

    #[test]
    fn decodes_reference_stereo_and_float(frames in prop::collection::vec((any::<i16>(), any::<i16>()), 1..200), floats in prop::collection::vec(-1.0..1.0f32, 1..200)) {
        let mut buf = std::io::Cursor::new(Vec::new());
        let spec = hound::WavSpec { channels: 2, sample_rate: 22050, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for (l, r) in &frames {
            w.write_sample(*l).unwrap();
            w.write_sample(*r).unwrap();
        }
        w.finalize().unwrap();
        let s = decode_wav(buf.get_ref()).unwrap();
        prop_assert_eq!(s.samples.len(), frames.len());
        for (v, (l, r)) in s.samples.iter().zip(&frames) {
            prop_assert!((v - (*l as f64 + *r as f64) / 65536.0).abs() < 1e-15);
        }

        let mut buf = std::io::Cursor::new(Vec::new());
        let spec = hound::WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for v in &floats {
            w.write_sample(*v).unwrap();
        }
        w.finalize().unwrap();
        let s = decode_wav(buf.get_ref()).unwrap();
        prop_assert_eq!(s.samples, floats.iter().map(|v| *v as f64).collect::<Vec<_>>());
    }

    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(logits in prop::collection::vec(-50.0..50.0f64, 1..10), c in -1e3..1e3f64) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= 0.0));
        let shifted: Vec<f64> = logits.iter().map(|l| l + c).collect();
        let q = softmax(&shifted);
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn stratified_split_partitions_and_balances(counts in prop::collection::vec(2usize..30, 2..6), frac in 0.05..0.95f64, seed in any::<u64>()) {
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, n)| std::iter::repeat(c).take(*n)).collect();
        let split = stratified_split(&labels, counts.len(), frac, seed).unwrap();
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for (c, &n) in counts.iter().enumerate() {
            let n_test = split.test.iter().filter(|&&i| labels[i] == c).count();
            prop_assert!((n_test as f64 - frac * n as f64).abs() <= 1.0, "class {c}: {n_test} of {n}");
            prop_assert!(n_test >= 1 && n_test < n);
        }
        prop_assert_eq!(split, stratified_split(&labels, counts.len(), frac, seed).unwrap());
    }

    #[test]
    fn chunks_cover_the_track(rows in 1usize..300, chunk_len in 1usize..60, overlap_frac in 0.0..1.0f64) {
        let overlap = ((chunk_len as f64 * overlap_frac) as usize).min(chunk_len - 1);
        let fm = FeatureMatrix::new(rows, 1, (1..=rows).map(|v| v as f64).collect(), 1).unwrap();
        let chunks = chunk_sequence(&fm, chunk_len, overlap).unwrap();
        let step = chunk_len - overlap;
        prop_assert!(!chunks.is_empty());
        for (i, c) in chunks.iter().enumerate() {
            prop_assert_eq!(c.rows(), chunk_len);
            let start = i * step;
            let real = chunk_len.min(rows - start);
            prop_assert!(i == 0 || 2 * real >= chunk_len);
            for t in 0..chunk_len {
                let want = if t < real { (start + t + 1) as f64 } else { 0.0 };
                prop_assert_eq!(c.get(t, 0), want);
            }
        }
    }

    #[test]
    fn cq_grid_is_geometric(f0 in 20.0..200.0f64, octaves in 1.0..6.0f64, b in 1u32..37) {
        let fs = 44100.0;
        let fmax = (f0 * 2f64.powf(octaves)).min(0.45 * fs);
        let grid = cq_frequency_grid(f0, fmax, b, fs).unwrap();
        let ratio = 2f64.powf(1.0 / b as f64);
        prop_assert!(grid.freqs.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));
        prop_assert!(*grid.freqs.last().unwrap() <= fmax * (1.0 + 1e-12));
    }

    #[test]
    fn svm_predictions_ignore_affine_rescaling(seed in 0u64..1000, shift in -100.0..100.0f64, scale in 0.01..100.0f64) {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| {
            let c = (i % 2) as f64 * 3.0;
            vec![c + ((i * 7 + seed as usize) % 11) as f64 / 11.0, ((i * 5) % 13) as f64 / 13.0 - c]
        }).collect();
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let cfg = SvmConfig { seed, ..Default::default() };
        let (m1, _) = svm_train(&pts, &y, &names, &cfg).unwrap();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] * scale + shift, p[1] / scale - shift]).collect();
        let (m2, _) = svm_train(&moved, &y, &names, &cfg).unwrap();
        for (p, q) in pts.iter().zip(&moved) {
            prop_assert_eq!(svm_predict(&m1, p).unwrap().0, svm_predict(&m2, q).unwrap().0);
        }
    }
}
