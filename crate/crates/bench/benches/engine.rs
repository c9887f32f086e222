use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use onlinecs::{ChannelModel, Likelihood, SparsePrior, StateEvolution};
use onlinecs_bench::Stream;

fn engine_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine_update");
    for (label, channel) in [
        ("awgn", ChannelModel::awgn(0.1).unwrap()),
        ("one_bit", ChannelModel::one_bit(0.1).unwrap()),
    ] {
        for n in [1_000usize, 10_000, 100_000] {
            group.throughput(Throughput::Elements(n as u64));
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, &n| {
                let mut stream = Stream::new(n, channel, 16, 1);
                let mut k = 0;
                b.iter(|| {
                    stream.step(k);
                    k += 1;
                });
                black_box(stream.engine.means()[0]);
            });
        }
    }
    group.finish();
}

fn scalar_kernels(c: &mut Criterion) {
    let prior = SparsePrior::new(0.1, 1.0).unwrap();
    c.bench_function("posterior_mean_var", |b| {
        b.iter(|| prior.posterior_mean_var(black_box(12.5), black_box(3.2)))
    });
    let one_bit = ChannelModel::one_bit(0.1).unwrap();
    c.bench_function("smoothed_evidence_one_bit", |b| {
        b.iter(|| one_bit.smoothed_evidence(black_box(1.0), black_box(-0.7), black_box(0.3)))
    });
}

fn state_evolution(c: &mut Criterion) {
    let prior = SparsePrior::new(0.1, 1.0).unwrap();
    let awgn = StateEvolution::new(prior, ChannelModel::awgn(0.1).unwrap());
    let one_bit = StateEvolution::new(prior, ChannelModel::one_bit(0.1).unwrap());
    c.bench_function("mse_from_qhat", |b| {
        b.iter(|| awgn.mse_from_qhat(black_box(25.0)))
    });
    c.bench_function("ode_rhs_one_bit", |b| b.iter(|| one_bit.ode_rhs(black_box(25.0))));
}

criterion_group!(benches, engine_update, scalar_kernels, state_evolution);
criterion_main!(benches);
