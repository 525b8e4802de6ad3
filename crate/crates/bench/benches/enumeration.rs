use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ergokit_bench::{desk_inputs, fair_coin, pair_potential, spaces};
use ergokit_core::construction::construct;
use ergokit_core::entropy::{separated_count, EpsScale, Method};
use ergokit_core::measures::katok_entropy_estimate;
use ergokit_core::pressure::pressure_estimate;
use ergokit_core::ShiftSpace;
use std::hint::black_box;

fn language(c: &mut Criterion) {
    let mut group = c.benchmark_group("language");
    for (name, _) in spaces() {
        group.bench_with_input(BenchmarkId::new(name, 16), &16, |b, &n| {
            // Fresh space per iteration so the language cache is cold.
            b.iter(|| {
                let space = spaces().into_iter().find(|(s, _)| *s == name).unwrap().1;
                black_box(space.language(n).unwrap().len())
            })
        });
    }
    group.finish();
}

fn separated(c: &mut Criterion) {
    let mut group = c.benchmark_group("separated-brute-force");
    group.sample_size(10);
    let m = EpsScale::new(1).unwrap();
    for (name, space) in spaces() {
        group.bench_with_input(BenchmarkId::new(name, 10), &10, |b, &n| {
            b.iter(|| black_box(separated_count(&space, n, m, Method::BruteForce).unwrap().count))
        });
    }
    group.finish();
}

fn measures_and_pressure(c: &mut Criterion) {
    let mu = fair_coin();
    c.bench_function("katok n=14", |b| {
        b.iter(|| {
            black_box(katok_entropy_estimate(&mu, 14, EpsScale::new(1).unwrap(), 0.1, 1 << 20).unwrap())
        })
    });
    let phi = pair_potential();
    let full = ShiftSpace::full(2);
    c.bench_function("pressure n=14 m=2", |b| {
        b.iter(|| {
            black_box(
                pressure_estimate(&full, &phi, 14, EpsScale::new(2).unwrap())
                    .unwrap()
                    .value,
            )
        })
    });
}

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construction");
    group.sample_size(10);
    let full = ShiftSpace::full(2);
    let mu = fair_coin();
    let inputs = desk_inputs();
    group.bench_function("desk depth 3", |b| {
        b.iter(|| black_box(construct(&full, &mu, &inputs, 3).unwrap().0.lambda_words))
    });
    group.finish();
}

criterion_group!(benches, language, separated, measures_and_pressure, construction);
criterion_main!(benches);
