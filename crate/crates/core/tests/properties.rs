//! Invariants that span modules, checked on random parameters.

use pamkit::chaos::chaos_partial_sum;
use pamkit::hamiltonian::{expected_hamiltonian, Mode};
use pamkit::mc::McConfig;
use pamkit::moments::{mixed_moment_replicates, Offset};
use pamkit::oracles::{dirichlet_beta_integral, lemma0_sandwich};
use pamkit::pathsim::{sample_path, TimeGrid};
use pamkit::spectral::{check_hypothesis_i, check_hypothesis_ii, expected_gamma, Sense};
use pamkit::{CovarianceKernel, InitialCondition, LevyProcessSpec, NoiseSpec};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = CovarianceKernel> {
    prop_oneof![
        (0.1f64..0.9).prop_map(|b| CovarianceKernel::riesz(b, 1).unwrap()),
        (0.5f64..2.0).prop_map(|c| CovarianceKernel::cauchy(c, 1).unwrap()),
        (0.5f64..2.0).prop_map(|c| CovarianceKernel::poisson(c, 1).unwrap()),
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(c, a)| CovarianceKernel::ornstein_uhlenbeck(c, a, 1).unwrap()),
    ]
}

fn process_strategy() -> impl Strategy<Value = LevyProcessSpec> {
    prop_oneof![
        Just(LevyProcessSpec::brownian(1)),
        (0.6f64..2.0).prop_map(|a| LevyProcessSpec::stable(a, 1).unwrap())
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hypothesis_one_is_monotone_in_beta0(k in kernel_strategy(), p in process_strategy(), b in 0.05f64..0.9, shrink in 0.0f64..1.0) {
        let hi = NoiseSpec::new(b, k.clone()).unwrap();
        let lo = NoiseSpec::new(b * shrink, k).unwrap();
        if check_hypothesis_i(&p, &hi).unwrap().holds {
            prop_assert!(check_hypothesis_i(&p, &lo).unwrap().holds);
        }
    }

    #[test]
    fn hypothesis_one_implies_two(k in kernel_strategy(), p in process_strategy(), b in 0.0f64..0.9) {
        let n = NoiseSpec::new(b, k).unwrap();
        if check_hypothesis_i(&p, &n).unwrap().holds {
            prop_assert!(check_hypothesis_ii(&p, &n).unwrap().holds);
        }
    }

    #[test]
    fn expected_gamma_decreases_in_time(k in kernel_strategy(), p in process_strategy(), s in 0.05f64..2.0, ds in 0.01f64..2.0) {
        let a = expected_gamma(&p, &k, s).unwrap();
        let b = expected_gamma(&p, &k, s + ds).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-9));
    }

    #[test]
    fn cross_expectation_is_below_self(p in process_strategy(), b in 0.0f64..0.8, t in 0.1f64..2.0, c in 0.5f64..2.0) {
        // X_r − Y_s has the law of X_{r+s}, X_r − X_s that of X_{|r−s|}
        let k = CovarianceKernel::cauchy(c, 1).unwrap();
        let s = expected_hamiltonian(&p, &k, b, t, Mode::SelfPath).unwrap();
        let x = expected_hamiltonian(&p, &k, b, t, Mode::Cross).unwrap();
        prop_assert!(x <= s * (1.0 + 1e-9));
    }

    #[test]
    fn stratonovich_dominates_skorohod_per_replicate(seed in 0u64..1000, b in 0.1f64..0.7, p in 1usize..=3) {
        let process = LevyProcessSpec::brownian(1);
        let noise = NoiseSpec::new(b, CovarianceKernel::gaussian(1)).unwrap();
        let grid = TimeGrid::new(0.5, 16).unwrap();
        let mc = McConfig::new(50, seed);
        let u0 = InitialCondition::constant(1.0);
        let offsets = vec![Offset::new(0.5, vec![0.0]); p];
        let st = mixed_moment_replicates(Sense::Stratonovich, &offsets, &u0, &process, &noise, &grid, &mc).unwrap();
        let sk = mixed_moment_replicates(Sense::Skorohod, &offsets, &u0, &process, &noise, &grid, &mc).unwrap();
        prop_assert!(st.iter().zip(&sk).all(|(a, b)| a >= b));
    }

    #[test]
    fn chaos_partial_sums_are_nondecreasing(seed in 0u64..1000, c in 0.5f64..2.0) {
        let process = LevyProcessSpec::brownian(1);
        let noise = NoiseSpec::new(0.25, CovarianceKernel::cauchy(1.0, 1).unwrap()).unwrap();
        let grid = TimeGrid::new(0.5, 16).unwrap();
        let s = chaos_partial_sum(5, 0.5, &InitialCondition::constant(c), &process, &noise, &grid, &McConfig::new(50, seed)).unwrap();
        prop_assert!(s.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(s.partial_sums[0], c * c);
    }

    #[test]
    fn paths_depend_only_on_seed_and_stream(seed in any::<u64>(), stream in 0u64..1000, n in 1usize..50) {
        let p = LevyProcessSpec::stable(1.3, 2).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        let a = sample_path(&p, &grid, seed, stream);
        let b = sample_path(&p, &grid, seed, stream);
        prop_assert_eq!(&a.values, &b.values);
        let c = sample_path(&p, &grid, seed, stream + 1);
        prop_assert_ne!(&a.values, &c.values);
    }

    #[test]
    fn dirichlet_integral_scales_homogeneously(a in proptest::collection::vec(-0.9f64..0.9, 1..=3), t in 0.1f64..3.0, s in 0.2f64..5.0) {
        let n = a.len() as f64;
        let deg: f64 = a.iter().sum::<f64>() + n;
        let x = dirichlet_beta_integral(&a, s * t).unwrap();
        let y = dirichlet_beta_integral(&a, t).unwrap() * s.powf(deg);
        prop_assert!((x - y).abs() <= 1e-12 * y);
    }

    #[test]
    fn sandwich_holds_with_native_constants(b in 0.0f64..0.95, t in 0.01f64..10.0, x in 0.0f64..1e4) {
        let r = lemma0_sandwich(b, t, x).unwrap();
        prop_assert!(r.satisfied);
        prop_assert_eq!(r.constant_scale, 1.0);
    }
}
