//! Hot kernels under whichever backend this build has.
//!
//! Compare the rayon and sequential builds through criterion baselines:
//!
//! ```text
//! cargo bench -p wavesnn --bench kernels -- --save-baseline parallel
//! cargo bench -p wavesnn --bench kernels --no-default-features -- --baseline parallel
//! ```
//!
//! The `presentations` group also runs both paths inside one binary.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wavesnn::matrix::{support, DenseMatrix};
use wavesnn::network::{init_weights, noise_drive};
use wavesnn::par;
use wavesnn::plasticity::{stdp_update_normalized, WeightMatrix};
use wavesnn::presets;
use wavesnn::tasks::stream::InputStream;
use wavesnn::Network;

fn backend() -> &'static str {
    if par::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn matvec(c: &mut Criterion) {
    let mut g = c.benchmark_group("matvec");
    for n in [400usize, 784, 1600] {
        let m = DenseMatrix::from_fn(n, n, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0);
        let x = noise_drive(n, 1.0, 7, 0);
        let sparse: Vec<f64> = x.iter().map(|&v| if v > 0.9 { 1.0 } else { 0.0 }).collect();
        let s = support(&sparse);
        g.bench_with_input(BenchmarkId::new("dense", n), &n, |b, _| {
            b.iter(|| black_box(m.mul_vec(black_box(&x)).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("sparse_10pct", n), &n, |b, _| {
            b.iter(|| black_box(m.mul_sparse(black_box(&sparse), &s).unwrap()))
        });
    }
    g.finish();
}

fn stdp(c: &mut Criterion) {
    let (pre, post) = (784, 400);
    let w0 = WeightMatrix::new(init_weights(pre, post, 1.0, 0.5, 16.0, 3).unwrap(), 0, 1).unwrap();
    let y_pre: Vec<f64> = (0..pre).map(|j| f64::from(u8::from(j % 20 == 0))).collect();
    let y_post: Vec<f64> = (0..post).map(|i| f64::from(u8::from(i % 10 == 0))).collect();
    c.bench_function("stdp_normalized_784x400", |b| {
        b.iter_batched_ref(
            || w0.clone(),
            |w| stdp_update_normalized(w, &y_pre, &y_post, 50.0, 0.1, 16.0).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn network_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("network_step");
    for name in [presets::WAVES, presets::POOLING] {
        let cfg = presets::load(name).unwrap();
        let net = Network::new(cfg.network()).unwrap();
        let mut state = net.initial_state().unwrap();
        // Warm into the wave regime so the spike support is realistic.
        net.run_from(&mut state, &InputStream::silent(), 300).unwrap();
        let zeros = vec![0.0; net.layer_size(0)];
        g.bench_function(name.trim_end_matches(".json"), |b| {
            b.iter(|| black_box(net.step(&mut state, &zeros).unwrap()))
        });
    }
    g.finish();
}

fn presentations(c: &mut Criterion) {
    let cfg = presets::load(presets::MNIST).unwrap();
    let net = Network::new(cfg.network()).unwrap();
    let state = net.initial_state().unwrap();
    let frames: Vec<Vec<f64>> = (0..16)
        .map(|i| noise_drive(net.layer_size(0), 6.0, i, 0))
        .collect();
    let present = |f: &Vec<f64>| net.present_frozen(&state.weights, f, 50, None, 1).unwrap();
    let mut g = c.benchmark_group("presentations");
    g.sample_size(10);
    eprintln!("presentations: map_collect backend is {}", backend());
    g.bench_function("map_collect", |b| {
        b.iter(|| black_box(par::map_collect(&frames, present)))
    });
    g.bench_function("plain_iter", |b| {
        b.iter(|| black_box(frames.iter().map(present).collect::<Vec<_>>()))
    });
    g.finish();
}

criterion_group!(benches, matvec, stdp, network_step, presentations);
criterion_main!(benches);
