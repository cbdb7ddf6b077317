use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use framelab::frame::{self, canonical_parseval};
use framelab::kaczmarz::{auxiliary_sequence, herr_weber_table, ExponentialSpace};
use framelab::measures::{ExponentialWindow, FourierCoefficients};
use framelab::numerics::{eigvals_hermitian, singular_values};
use framelab::{classify, LadderSchedule, MeasureModel, SequenceSpec, SpectralTolerance, WeightFormula};
use framelab_bench::{gaussian, SIZES};

fn dense(c: &mut Criterion) {
    let tol = SpectralTolerance::default();
    let mut g = c.benchmark_group("dense");
    for d in SIZES {
        let s = gaussian(d, 2 * d, 1);
        let op = frame::frame_operator(&s);
        g.bench_with_input(BenchmarkId::new("singular_values", d), &s, |b, s| {
            b.iter(|| singular_values(black_box(s.matrix())))
        });
        g.bench_with_input(BenchmarkId::new("eigvals_hermitian", d), &op, |b, m| {
            b.iter(|| eigvals_hermitian(black_box(m), &tol).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("canonical_parseval", d), &s, |b, s| {
            b.iter(|| canonical_parseval(black_box(s), &tol).unwrap())
        });
    }
    g.finish();
}

fn ladders(c: &mut Criterion) {
    let mut g = c.benchmark_group("ladder");
    g.sample_size(10);
    let ladder: LadderSchedule = "d=16..128:x2".parse().unwrap();
    let spec = SequenceSpec::WeightedBasis { weight: WeightFormula::NPlusOne };
    g.bench_function("sigma_profile", |b| b.iter(|| classify::sigma_profile(&spec, &ladder, 32).unwrap()));
    g.finish();
}

fn measures(c: &mut Criterion) {
    let mut g = c.benchmark_group("measures");
    g.sample_size(10);
    let window = ExponentialWindow::one_sided(128).unwrap();
    g.bench_function("cantor_gram_cold", |b| {
        b.iter(|| FourierCoefficients::new(MeasureModel::middle_thirds_cantor()).gram(window).unwrap())
    });
    let space = ExponentialSpace::new(&MeasureModel::middle_thirds_cantor(), window).unwrap();
    let f = space.random_element(&mut ChaCha8Rng::seed_from_u64(3));
    g.bench_function("auxiliary_sequence", |b| b.iter(|| auxiliary_sequence(&space, 128).unwrap()));
    let aux = auxiliary_sequence(&space, 128).unwrap();
    g.bench_function("herr_weber_table", |b| b.iter(|| herr_weber_table(&space, &aux, black_box(&f)).unwrap()));
    g.finish();
}

criterion_group!(benches, dense, ladders, measures);
criterion_main!(benches);
