use mvmatern::crosscheck::soundness;
use mvmatern::matrix::{is_cnd, DEFAULT_TOL};
use mvmatern::validity::random::{random_satisfying, random_spec};
use mvmatern::validity::{
    apanasovich_recover, check, check_apanasovich, check_theorem2b, check_theorem3, log_grid, CheckOptions,
    ConditionSet, Theorem3Variant,
};
use mvmatern::{MaternSpec, SymMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sufficient_set() -> impl Strategy<Value = ConditionSet> {
    prop::sample::select(ConditionSet::SUFFICIENT.to_vec())
}

fn assert_sound(spec: &MaternSpec, rng: &mut ChaCha8Rng) -> Result<(), TestCaseError> {
    let s = soundness(spec, 40, &log_grid(1e-3, 1e3, 400), rng).unwrap();
    prop_assert!(s.passed(), "min eigenvalue {:e}, trace {:e}, spectral {:?}", s.min_eigenvalue, s.trace, s.spectral);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_models_satisfy_their_set_and_are_valid(
        set in sufficient_set(),
        p in prop::sample::select(vec![2usize, 3, 5]),
        d in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, opts) = random_satisfying(set, p, d, &mut rng).unwrap();
        let report = check(set, &spec, &opts).unwrap();
        prop_assert!(report.satisfied, "{}", report.to_text());
        prop_assert_eq!(report.satisfied, report.clauses.iter().all(|c| c.passed));
        assert_sound(&spec, &mut rng)?;
    }

    #[test]
    fn any_satisfied_set_implies_validity(p in 2usize..=4, d in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = random_spec(p, d, &mut rng);
        // shrink the cross-covariances so that some sets are satisfied
        let shrink = rng.random_range(0.0..1.0);
        spec.sigma = SymMatrix::from_fn(p, |i, j| spec.sigma.get(i, j) * if i == j { 1.0 } else { shrink });
        let opts = CheckOptions::default();
        for set in ConditionSet::SUFFICIENT {
            if check(set, &spec, &opts).unwrap().satisfied {
                assert_sound(&spec, &mut rng)?;
                break;
            }
        }
    }

    #[test]
    fn examples_nest_in_theorem3(
        set in prop::sample::select(vec![ConditionSet::Ex1, ConditionSet::Ex2, ConditionSet::Ex3]),
        p in 2usize..=5,
        d in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, _) = random_satisfying(set, p, d, &mut rng).unwrap();
        let variant = match set {
            ConditionSet::Ex3 => Theorem3Variant::B { beta: 1e6 },
            _ => Theorem3Variant::A,
        };
        let parent = check_theorem3(&spec, variant, DEFAULT_TOL).unwrap();
        prop_assert!(parent.satisfied, "{}", parent.to_text());
    }

    #[test]
    fn theorem3_nests_in_theorem2b(p in 2usize..=5, d in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, _) = random_satisfying(ConditionSet::Thm3A, p, d, &mut rng).unwrap();
        prop_assert!(check_theorem3(&spec, Theorem3Variant::A, DEFAULT_TOL).unwrap().satisfied);
        let psi = spec.nu.mul(&spec.alpha.powf(-2.0).unwrap()).unwrap();
        prop_assert!(check_theorem2b(&spec, &psi, DEFAULT_TOL).unwrap().satisfied);
        let (spec, opts) = random_satisfying(ConditionSet::Thm3B, p, d, &mut rng).unwrap();
        let beta = opts.beta.unwrap();
        let variant = Theorem3Variant::B { beta };
        prop_assert!(check_theorem3(&spec, variant, DEFAULT_TOL).unwrap().satisfied);
        prop_assert!(check_theorem2b(&spec, &SymMatrix::constant(p, 1.0 / beta), DEFAULT_TOL).unwrap().satisfied);
    }

    #[test]
    fn apanasovich_nu_is_cnd(p in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, _) = random_satisfying(ConditionSet::Apanasovich, p, 2, &mut rng).unwrap();
        prop_assert!(is_cnd(&spec.nu, DEFAULT_TOL).unwrap().is_psd);
        let (delta, a) = apanasovich_recover(&spec.nu, DEFAULT_TOL).unwrap().unwrap();
        prop_assert!(delta >= 0.0 && a.min_entry() >= 0.0);
    }
}

#[test]
fn apanasovich_and_theorem3b_coincide_for_averaged_nu() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut agreements = 0;
    for _ in 0..200 {
        let p = rng.random_range(2..=5);
        let d = rng.random_range(1..=3);
        let (mut spec, opts) = random_satisfying(ConditionSet::Thm3B, p, d, &mut rng).unwrap();
        let diag: Vec<f64> = (0..p).map(|_| rng.random_range(0.3..2.5)).collect();
        spec.nu = SymMatrix::from_fn(p, |i, j| 0.5 * (diag[i] + diag[j]));
        // perturb σ so that both verdicts occur
        let bump = rng.random_range(0.0..1.5);
        spec.sigma = SymMatrix::from_fn(p, |i, j| spec.sigma.get(i, j) * if i == j { 1.0 } else { 1.0 + bump });
        let beta =
            opts.beta.unwrap() * rng.random_range(0.01..0.2) * spec.alpha.min_entry().powi(2) / spec.nu.max_entry();
        let thm = check_theorem3(&spec, Theorem3Variant::B { beta }, DEFAULT_TOL).unwrap();
        if !thm.clauses[1].passed {
            continue;
        }
        let apan = check_apanasovich(&spec, 0.0, &SymMatrix::constant(p, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(apan.satisfied, thm.satisfied, "{}\n{}", apan.to_text(), thm.to_text());
        agreements += 1;
    }
    assert!(agreements >= 150, "{agreements}");
}
