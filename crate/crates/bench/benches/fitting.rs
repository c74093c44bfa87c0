use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mvmatern::geostat::{gaussian_loglik, simulate_field, LikelihoodContext};
use mvmatern::{MaternSpec, SiteSet, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn loglik(c: &mut Criterion) {
    let alpha = SymMatrix::new(&[vec![1.0, 0.9, 0.8], vec![0.9, 0.8, 0.7], vec![0.8, 0.7, 0.6]]).unwrap();
    let sigma = SymMatrix::new(&[vec![1.0, 0.5, 0.3], vec![0.5, 1.0, 0.4], vec![0.3, 0.4, 1.0]]).unwrap();
    let spec = MaternSpec::new(2, alpha, SymMatrix::constant(3, 0.5), sigma).unwrap();
    let nugget = SymMatrix::identity(3).scale(0.05);
    let sites = SiteSet::random_uniform(300, 2, 0.0, 10.0, &mut ChaCha8Rng::seed_from_u64(0));
    let data = simulate_field(&sites, &spec, &nugget, 1).unwrap();
    let mut g = c.benchmark_group("loglik/n=300,p=3");
    g.sample_size(20);
    g.bench_function("cold", |b| b.iter(|| gaussian_loglik(black_box(&data), &spec, &nugget).unwrap()));
    let ctx = LikelihoodContext::new(&data);
    g.bench_function("cached_correlations", |b| b.iter(|| ctx.loglik(black_box(&spec), &nugget).unwrap()));
    g.finish();
}

criterion_group!(benches, loglik);
criterion_main!(benches);
