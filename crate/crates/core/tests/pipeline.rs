use mvmatern::geostat::{
    dic, empirical_variogram, empirical_variogram_pooled, gaussian_loglik, normal_scores, simulate_replicates,
    wls_fit_exponential, AlphaMode, FitModel, LikelihoodContext, McmcConfig, ParamRecord, SpatialDataset,
};
use mvmatern::validity::ConditionSet;
use mvmatern::{MaternSpec, SiteSet, SymMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truth() -> (MaternSpec, SymMatrix) {
    let alpha = SymMatrix::new(&[vec![4.0, 2.5], vec![2.5, 1.0]]).unwrap().powf(-0.5).unwrap();
    let sigma = SymMatrix::new(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let spec = MaternSpec::new(2, alpha, SymMatrix::constant(2, 0.5), sigma).unwrap();
    (spec, SymMatrix::identity(2).scale(0.2))
}

fn sites(n: usize, seed: u64) -> SiteSet {
    SiteSet::random_uniform(n, 2, 0.0, 10.0, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn wls_error(reps: &[SpatialDataset], spec: &MaternSpec) -> f64 {
    let fit = wls_fit_exponential(&empirical_variogram_pooled(reps, 15, None).unwrap()).unwrap();
    let mut total = 0.0;
    for (i, j, s) in spec.sigma.upper() {
        total += (fit.sigma.get(i, j) / s - 1.0).abs() + (fit.alpha.get(i, j) / spec.alpha.get(i, j) - 1.0).abs();
    }
    total / 6.0
}

#[test]
fn wls_error_shrinks_with_replicates() {
    let (spec, v) = truth();
    let (mut one, mut ten) = (0.0, 0.0);
    for seed in 0..4 {
        let reps = simulate_replicates(&sites(150, seed), &spec, &v, 10, 100 + seed).unwrap();
        one += wls_error(&reps[..1], &spec);
        ten += wls_error(&reps, &spec);
    }
    assert!(ten < one, "1 replicate: {one}, 10 replicates: {ten}");
}

#[test]
fn cross_variogram_matches_model_within_monte_carlo_error() {
    let (spec, v) = truth();
    let reps = simulate_replicates(&sites(200, 3), &spec, &v, 10, 31).unwrap();
    let per: Vec<_> = reps.iter().map(|r| empirical_variogram(r, 10, Some(4.0)).unwrap()).collect();
    let (mut inside, mut total) = (0, 0);
    for b in 0..10 {
        for (i, j, s) in spec.sigma.upper() {
            let vals: Vec<f64> = per.iter().map(|e| e.gamma[b].get(i, j)).collect();
            let h = per.iter().map(|e| e.centers[b]).sum::<f64>() / 10.0;
            let model = v.get(i, j) + s * (1.0 - (-spec.alpha.get(i, j) * h).exp());
            let mean = vals.iter().sum::<f64>() / 10.0;
            let se = (vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9.0).sqrt() / 10f64.sqrt();
            total += 1;
            inside += ((mean - model).abs() <= 3.0 * se) as usize;
        }
    }
    assert!(inside as f64 >= 0.8 * total as f64, "{inside}/{total}");
}

#[test]
fn constrained_chain_stores_only_valid_samples() {
    let (spec, v) = truth();
    let data = simulate_replicates(&sites(50, 8), &spec, &v, 1, 9).unwrap().remove(0);
    let ctx = LikelihoodContext::new(&data);
    let model = FitModel::new(2, 2, ConditionSet::Ex1, AlphaMode::Free).unwrap();
    let init = ParamRecord { alpha: spec.alpha.clone(), sigma: spec.sigma.clone(), nugget: v.clone() };
    let cfg = McmcConfig { iters: 3000, burn_in: 1000, seed: 5, ..Default::default() };
    let chain = model.fit_mcmc(&ctx, &init, &cfg).unwrap();
    assert_eq!(chain.samples.len(), 2000);
    assert!(chain.accepted > 0);
    for s in chain.samples.iter().step_by(100) {
        assert!(model.satisfies(&model.decode(s)).unwrap());
    }
    let again = model.fit_mcmc(&ctx, &init, &cfg).unwrap();
    assert_eq!(chain, again);
    let r = dic(&chain, |t| model.loglik_at(&ctx, t)).unwrap();
    assert_eq!(r.dic, r.mean_deviance + r.p_d);
    let ll = gaussian_loglik(&data, &spec, &v).unwrap();
    assert!(ll.is_finite());
    // the generating parameters violate nothing, an infeasible start is refused
    let bad = ParamRecord { sigma: SymMatrix::new(&[vec![1.0, 0.95], vec![0.95, 1.0]]).unwrap(), ..init };
    assert!(model.fit_mcmc(&ctx, &bad, &cfg).is_err());
}

#[test]
fn dic_of_a_frozen_chain_has_no_complexity() {
    let (spec, v) = truth();
    let data = simulate_replicates(&sites(20, 2), &spec, &v, 1, 2).unwrap().remove(0);
    let ctx = LikelihoodContext::new(&data);
    let model = FitModel::new(2, 2, ConditionSet::Ex1, AlphaMode::Fixed(spec.alpha.clone())).unwrap();
    let theta = model.encode(&ParamRecord { alpha: spec.alpha.clone(), sigma: spec.sigma.clone(), nugget: v }).unwrap();
    let ll = model.loglik_at(&ctx, &theta).unwrap();
    let chain = mvmatern::geostat::McmcChain {
        names: model.names(),
        samples: vec![theta.clone(); 200],
        loglik: vec![ll; 200],
        accepted: 0,
        constraint_rejections: 0,
        iterations: 400,
        burn_in: 200,
        seed: 0,
        scale: 1.0,
        retunes: Vec::new(),
    };
    let r = dic(&chain, |t| model.loglik_at(&ctx, t)).unwrap();
    assert!(r.p_d.abs() < 1e-9);
    assert!((r.dic - r.mean_deviance).abs() < 1e-9);
}

#[test]
fn gneiting_projection_uses_log_mean_alpha() {
    let model = FitModel::new(2, 2, ConditionSet::Gneiting, AlphaMode::Constant).unwrap();
    let alpha = SymMatrix::new(&[vec![0.25, 1.0], vec![1.0, 4.0]]).unwrap();
    let rec = ParamRecord { alpha, sigma: SymMatrix::identity(2), nugget: SymMatrix::identity(2).scale(0.1) };
    let out = model.nearest_valid(&rec, 0).unwrap();
    assert!(out.alpha.is_constant(1e-12));
    assert!((out.alpha.get(0, 1) - 1.0).abs() < 1e-12);
    assert!(model.satisfies(&out).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_scores_are_standardized_and_rank_based(
        raw in prop::collection::vec(-50.0f64..50.0, 6..60),
    ) {
        let n = raw.len() / 2;
        let values: Vec<f64> = raw[..2 * n].to_vec();
        prop_assume!((0..2).all(|k| (1..n).any(|s| values[s * 2 + k] != values[k])));
        let z = normal_scores(&values, n, 2).unwrap();
        for k in 0..2 {
            let col: Vec<f64> = (0..n).map(|s| z[s * 2 + k]).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            prop_assert!(mean.abs() <= 1e-12);
            prop_assert!((var - 1.0).abs() <= 1e-12);
        }
        let transformed: Vec<f64> = values.iter().map(|v| (v / 10.0).exp()).collect();
        let z2 = normal_scores(&transformed, n, 2).unwrap();
        for (a, b) in z.iter().zip(&z2) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
