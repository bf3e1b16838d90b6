use adctnet::adaptive::AdctNetParams;
use adctnet::baselines::power_spectrogram;
use adctnet::classifiers::{rnn_init, rnn_train, RnnTrainConfig};
use adctnet::{adaptive_stdct, adctnet_two_layer, short_time_dct, FeatureMatrix, StdctConfig, WindowKind};
use adctnet_bench::bench_signal;
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

const FS: f64 = 44100.0;

fn transforms(c: &mut Criterion) {
    let x = bench_signal(FS as usize, FS);
    let cfg = StdctConfig::new(256, 128, WindowKind::Hamming);
    c.bench_function("short_time_dct 1s win256", |b| b.iter(|| short_time_dct(black_box(&x), &cfg).unwrap()));
    c.bench_function("power_spectrogram 1s win256", |b| {
        b.iter(|| power_spectrogram(black_box(&x), FS, 256, 128, WindowKind::Hamming).unwrap())
    });

    let (l1, l2) = AdctNetParams::default().layer_configs(FS).unwrap();
    c.bench_function("adaptive_stdct 1s b12", |b| b.iter(|| adaptive_stdct(black_box(&x), &l1).unwrap()));

    c.bench_function("adctnet_two_layer 1s", |b| b.iter(|| adctnet_two_layer(black_box(&x), &l1, &l2).unwrap()));
}

fn rnn(c: &mut Criterion) {
    let (dim, hidden, classes, t) = (40, 32, 4, 40);
    let chunks: Vec<FeatureMatrix> = (0..16)
        .map(|i| {
            let data = (0..t * dim).map(|j| ((i * 31 + j * 7) % 17) as f64 / 17.0 - 0.5).collect();
            FeatureMatrix::new(t, dim, data, 1).unwrap()
        })
        .collect();
    let labels: Vec<usize> = (0..chunks.len()).map(|i| i % classes).collect();
    let cfg = RnnTrainConfig { epochs: 1, ..Default::default() };
    let model = rnn_init(dim, hidden, classes, 0).unwrap();
    c.bench_function("rnn_train 1 epoch 16x40 frames", |b| {
        b.iter_batched(
            || model.clone(),
            |mut m| rnn_train(&mut m, &chunks, &labels, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = transforms, rnn
}
criterion_main!(benches);
