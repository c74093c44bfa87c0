use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mvmatern::bounds::{rho_max, EquicorrStructure, DEFAULT_RHO_TOL};
use mvmatern::kernels::matern_corr;
use mvmatern::matrix::{is_cnd, is_psd};
use mvmatern::validity::random::random_symmetric;
use mvmatern::ConditionSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matern(c: &mut Criterion) {
    let mut g = c.benchmark_group("matern_corr");
    for nu in [0.5, 1.5, 2.3] {
        g.bench_function(format!("nu={nu}"), |b| b.iter(|| matern_corr(black_box(1.7), black_box(0.8), nu).unwrap()));
    }
    g.finish();
}

fn definiteness(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in [3, 10, 50] {
        let a = random_symmetric(p, -1.0, 1.0, &mut rng);
        c.bench_function(&format!("is_psd/p={p}"), |b| b.iter(|| is_psd(black_box(&a), 1e-10).unwrap()));
        c.bench_function(&format!("is_cnd/p={p}"), |b| b.iter(|| is_cnd(black_box(&a), 1e-10).unwrap()));
    }
}

fn bounds(c: &mut Criterion) {
    let s = EquicorrStructure::scaled_family(3, 2, 1.0, 0.0).unwrap();
    for set in [ConditionSet::Apanasovich, ConditionSet::Thm3B, ConditionSet::Ex1] {
        c.bench_function(&format!("rho_max/{set}"), |b| {
            b.iter(|| rho_max(black_box(&s), set, DEFAULT_RHO_TOL).unwrap())
        });
    }
}

criterion_group!(benches, matern, definiteness, bounds);
criterion_main!(benches);
