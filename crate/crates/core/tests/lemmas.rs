use mvmatern::crosscheck::{
    cnd_by_exponential, cnd_by_sampling, fourier_corr_1d, gaussian_limit_gap, gaussian_mixture_corr, max_zero_sum_form,
    smoothness_mixture_corr,
};
use mvmatern::kernels::matern_corr;
use mvmatern::matrix::{bernstein_matrix, hadamard, is_cnd, is_cnd_anchored, is_psd, HadamardOp};
use mvmatern::validity::random::{random_bernstein, random_cnd_bounded, random_symmetric};
use mvmatern::{SiteSet, SymMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;
const EXP_TS: [f64; 3] = [0.1, 1.0, 10.0];

#[test]
fn cnd_three_routes_agree_on_seeded_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cnd_count = 0;
    for k in 0..200 {
        let p = rng.random_range(2..=6);
        let a = if k % 2 == 0 { random_symmetric(p, -2.0, 2.0, &mut rng) } else { random_cnd_bounded(p, &mut rng) };
        let bordered = is_cnd(&a, TOL).unwrap().is_psd;
        let sampled = cnd_by_sampling(&a, 500, TOL, &mut rng);
        let exponential = cnd_by_exponential(&a, &EXP_TS, TOL).unwrap();
        assert_eq!(bordered, sampled, "matrix {k}: {a:?}");
        assert_eq!(bordered, exponential, "matrix {k}: {a:?}");
        cnd_count += bordered as usize;
    }
    assert!(cnd_count >= 100);
}

fn bernstein_points(rng: &mut ChaCha8Rng) -> (SymMatrix, SymMatrix) {
    let p = rng.random_range(2..=6);
    let pts = SiteSet::random_uniform(p, 2, 0.0, 3.0, rng);
    (bernstein_matrix(&random_bernstein(rng), &pts).unwrap(), bernstein_matrix(&random_bernstein(rng), &pts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn cnd_routes_agree_away_from_boundary(seed in any::<u64>(), cnd in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.random_range(2..=6);
        let a = if cnd { random_cnd_bounded(p, &mut rng) } else { random_symmetric(p, -2.0, 2.0, &mut rng) };
        let v = is_cnd(&a, TOL).unwrap();
        prop_assume!(v.is_psd || v.min_eigenvalue < -1e-3 * v.max_eigenvalue.abs().max(1.0));
        prop_assert_eq!(v.is_psd, cnd_by_exponential(&a, &EXP_TS, TOL).unwrap());
        if v.is_psd {
            prop_assert!(cnd_by_sampling(&a, 200, TOL, &mut rng));
        } else {
            // the witness of the bordered form, completed to a zero-sum vector
            let mut l = v.witness.clone();
            l[p - 1] = -l[..p - 1].iter().sum::<f64>();
            let q: f64 = (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| l[i] * a.get(i, j) * l[j]).sum();
            prop_assert!(q > 0.0);
        }
    }

    #[test]
    fn cnd_verdict_does_not_depend_on_anchor(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.random_range(2..=6);
        let a = if rng.random::<bool>() { random_cnd_bounded(p, &mut rng) } else { random_symmetric(p, -2.0, 2.0, &mut rng) };
        let v = is_cnd(&a, TOL).unwrap();
        prop_assume!(v.is_psd || v.min_eigenvalue < -1e-6 * v.max_eigenvalue.abs().max(1.0));
        for k in 0..p {
            prop_assert_eq!(is_cnd_anchored(&a, k, TOL).unwrap().is_psd, v.is_psd);
        }
    }

    #[test]
    fn positive_cnd_inverse_psd_and_powers_cnd(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (b, _) = bernstein_points(&mut rng);
        prop_assert!(b.all_positive());
        prop_assert!(is_cnd(&b, TOL).unwrap().is_psd);
        prop_assert!(is_psd(&hadamard(&b, HadamardOp::Inverse).unwrap(), TOL).unwrap().is_psd);
        for mu in [0.3, 0.7, 1.0] {
            prop_assert!(is_cnd(&hadamard(&b, HadamardOp::Power(mu)).unwrap(), TOL).unwrap().is_psd);
        }
    }

    #[test]
    fn cnd_closure(seed in any::<u64>(), c in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (b1, b2) = bernstein_points(&mut rng);
        prop_assert!(is_cnd(&b1.add(&b2).unwrap(), TOL).unwrap().is_psd);
        prop_assert!(is_cnd(&b1.scale(c), TOL).unwrap().is_psd);
        prop_assert!(is_cnd(&b1.mul(&b2).unwrap(), TOL).unwrap().is_psd);
    }

    #[test]
    fn variogram_shaped_matrix_is_cnd(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (b, _) = bernstein_points(&mut rng);
        let p = b.order();
        let eta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..3.0)).collect();
        let g = SymMatrix::from_fn(p, |i, j| 0.5 * (eta[i] + eta[j]) + b.get(i, j));
        prop_assert!(is_cnd(&g, TOL).unwrap().is_psd);
        prop_assert!(max_zero_sum_form(&g, 100, &mut rng) <= 1e-9 * g.max_entry().abs().max(1.0));
    }

    #[test]
    fn gaussian_mixture_identity(h in 0.05f64..4.0, alpha in 0.3f64..3.0, nu in 0.2f64..4.0) {
        let k = matern_corr(h, alpha, nu).unwrap();
        prop_assert!((gaussian_mixture_corr(h, alpha, nu).unwrap() - k).abs() <= 1e-6);
    }
}

#[test]
fn smoothness_mixture_identity() {
    for h in [0.1, 0.5, 1.0, 2.0, 4.0] {
        for alpha in [0.5, 1.0, 2.5] {
            for (nu, mu) in [(0.7, 1.0), (0.7, 0.5), (1.5, 2.0)] {
                let k = matern_corr(h, alpha, nu).unwrap();
                let m = smoothness_mixture_corr(h, alpha, nu, mu).unwrap();
                assert!((m - k).abs() <= 1e-6, "h {h} alpha {alpha} nu {nu} mu {mu}: {m} vs {k}");
            }
        }
    }
}

#[test]
fn fourier_pair_in_one_dimension() {
    for nu in [0.5, 1.5, 2.3] {
        for alpha in [0.7, 1.2] {
            for h in [0.1, 0.5, 1.0, 2.0] {
                let k = matern_corr(h, alpha, nu).unwrap();
                let f = fourier_corr_1d(h, alpha, nu).unwrap();
                assert!((f - k).abs() <= 1e-5, "nu {nu} alpha {alpha} h {h}: {f} vs {k}");
            }
        }
    }
}

#[test]
fn gaussian_limit_is_approached() {
    for beta in [0.5, 1.0, 2.0] {
        let gaps: Vec<f64> =
            [5.0, 50.0, 500.0].iter().map(|&nu| gaussian_limit_gap(beta, nu, 3.0, 601).unwrap()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "beta {beta}: {gaps:?}");
        assert!(gaps[2] <= 1e-2, "beta {beta}: {gaps:?}");
    }
}
