mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use skewrank::aggregation::{aggregate, filter_support, Method, PairwiseMatrix};
use skewrank::analysis::coherence;
use skewrank::experiments::{
    completion_tau, gen_pairwise_from_scores, irt_trial, kendall_tau, rate_items, recovery_trial, sample_entries,
    trial_rng, IrtSpec, RecoveryTrialSpec, ScoreModel,
};
use skewrank::linalg::skew_defect;
use skewrank::ratings::RatingsMatrix;
use skewrank::sample::SampleSet;
use skewrank::scoring::{extract_scores, rank_items, ScoreVector};
use skewrank::solver::{svp_complete, svp_complete_observed, SolverConfig};
use skewrank::svd::{truncated_svd, SvdBackend, SvdOptions};

fn ratings_strategy() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..10, 2usize..7).prop_flat_map(|(voters, items)| {
        prop::collection::vec(
            prop::collection::vec(prop::option::weighted(0.7, (1i32..=5).prop_map(f64::from)), items),
            voters,
        )
    })
}

fn ratings(rows: &[Vec<Option<f64>>]) -> RatingsMatrix {
    RatingsMatrix::from_dense(rows).unwrap()
}

fn assert_antisymmetric(y: &PairwiseMatrix) {
    for e in y.entries() {
        let back = y.get(e.j, e.i).expect("closure");
        assert_eq!(back.value, -e.value);
        assert_eq!(back.support, e.support);
        assert!(e.support >= 1 && e.i != e.j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_method_is_antisymmetric(rows in ratings_strategy()) {
        let r = ratings(&rows);
        for m in Method::ALL {
            assert_antisymmetric(&aggregate(&r, m).unwrap());
        }
    }

    #[test]
    fn arithmetic_mean_is_translation_invariant(rows in ratings_strategy(), shift in -20i32..20) {
        let r = ratings(&rows);
        let shifted = r.map_values(|v| v + f64::from(shift)).unwrap();
        prop_assert_eq!(aggregate(&r, Method::ArithmeticMean).unwrap(), aggregate(&shifted, Method::ArithmeticMean).unwrap());
    }

    #[test]
    fn geometric_mean_is_scale_invariant(rows in ratings_strategy(), power in -8i32..8) {
        let r = ratings(&rows);
        let scaled = r.map_values(|v| v * 2f64.powi(power)).unwrap();
        prop_assert_eq!(aggregate(&r, Method::GeometricMean).unwrap(), aggregate(&scaled, Method::GeometricMean).unwrap());
    }

    #[test]
    fn comparison_methods_are_monotone_invariant(rows in ratings_strategy()) {
        let r = ratings(&rows);
        let warped = r.map_values(|v| v.exp() - 10.0).unwrap();
        let cubed = r.map_values(|v| v * v * v).unwrap();
        for m in [Method::Binary, Method::StrictBinary, Method::LogOdds] {
            prop_assert_eq!(aggregate(&r, m).unwrap(), aggregate(&warped, m).unwrap());
            prop_assert_eq!(aggregate(&r, m).unwrap(), aggregate(&cubed, m).unwrap());
        }
    }

    #[test]
    fn zero_support_filter_round_trips(rows in ratings_strategy()) {
        let r = ratings(&rows);
        for m in Method::ALL {
            let y = aggregate(&r, m).unwrap();
            let f = filter_support(&y, 0);
            let kept: Vec<(usize, usize, f64)> = f.samples.upper().collect();
            let all: Vec<(usize, usize, f64)> = y.upper().iter().map(|e| (e.i, e.j, e.value)).collect();
            prop_assert_eq!(kept, all);
            prop_assert_eq!(f.samples.len(), 2 * y.num_pairs());
        }
    }

    #[test]
    fn ranking_is_translation_invariant(s in prop::collection::vec(-100.0f64..100.0, 1..30), shift in -1e3f64..1e3) {
        let ids: Vec<String> = (0..s.len()).map(|i| format!("i{i}")).collect();
        // Translation can merge near-equal scores under rounding; keep inputs apart.
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-9));
        let a = rank_items(&ScoreVector::new(s.clone()), &ids).unwrap();
        let b = rank_items(&ScoreVector::new(s.iter().map(|x| x + shift).collect()), &ids).unwrap();
        prop_assert_eq!(a.order(), b.order());
    }

    #[test]
    fn kendall_symmetry_and_negation(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let distinct = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s.windows(2).all(|w| w[0] != w[1])
        };
        prop_assume!(distinct(&x) && distinct(&y));
        let t = kendall_tau(&x, &y).unwrap();
        prop_assert_eq!(t, kendall_tau(&y, &x).unwrap());
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert_eq!(kendall_tau(&x, &neg).unwrap(), -t);
        prop_assert!((-1.0..=1.0).contains(&t));
    }

    #[test]
    fn coherence_is_scale_invariant(raw in prop::collection::vec(-10.0f64..10.0, 2..50), gamma in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let s = centered(&raw);
        prop_assume!(s.iter().any(|x| x.abs() > 1e-6));
        let a = coherence(&s, 1.0).unwrap();
        let scaled: Vec<f64> = s.iter().map(|x| x * gamma).collect();
        let b = coherence(&scaled, 1.0).unwrap();
        prop_assert!((a.theta - b.theta).abs() <= 1e-12 * a.theta);
        prop_assert!((a.rho - b.rho).abs() <= 1e-12 * a.rho);
        prop_assert!((a.nu - b.nu).abs() <= 1e-12 * a.nu);
        prop_assert!(a.theta >= 1.0 / s.len() as f64 - 1e-12 && a.theta <= 1.0 + 1e-12);
    }

    #[test]
    fn extraction_is_least_squares_optimal(n in 2usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_skew(n, &mut rng);
        let k = if n % 2 == 0 { n } else { n - 1 }.max(2).min(n);
        let f = truncated_svd(&x, k, &SvdOptions::default(), None).unwrap().factors;
        let got = extract_scores(&f);
        let want = least_squares_scores(&f.to_dense());
        for (g, w) in got.scores().iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
        prop_assert!(got.is_centered());
    }

    #[test]
    fn truncations_of_skew_matrices_are_skew(n in 2usize..40, half_k in 1usize..4, seed in any::<u64>()) {
        let k = (2 * half_k).min(n - n % 2).max(2);
        prop_assume!(k <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_skew(n, &mut rng);
        let svd = truncated_svd(&a, k, &SvdOptions::default(), None).unwrap();
        prop_assume!(!svd.gap_violated());
        let x = svd.factors.to_dense();
        prop_assert!(skew_defect(&x) <= 1e-10 * x.norm().max(1.0));
        prop_assert!(svd.factors.orthonormality_defect() <= 1e-10);
        let oracle = oracle_singular_values(&a);
        for (i, s) in svd.factors.s.iter().enumerate() {
            prop_assert!((s - oracle[i]).abs() <= 1e-10 * oracle[0]);
        }
    }
}

#[test]
fn iterative_backend_matches_oracle_on_paired_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [70, 90, 120] {
        let a = random_skew(n, &mut rng);
        let opts = SvdOptions { backend: SvdBackend::Iterative, ..Default::default() };
        let svd = truncated_svd(&a, 6, &opts, None).unwrap();
        let oracle = oracle_singular_values(&a);
        for (i, s) in svd.factors.s.iter().enumerate() {
            assert!((s - oracle[i]).abs() <= 1e-8 * oracle[0], "n={n} i={i}: {s} vs {}", oracle[i]);
        }
        for p in 0..3 {
            let (a1, a2) = (svd.factors.s[2 * p], svd.factors.s[2 * p + 1]);
            assert!((a1 - a2).abs() <= 1e-8 * a1);
        }
    }
}

#[test]
fn svp_iterates_stay_skew() {
    for seed in 0..20u64 {
        let mut rng = trial_rng(seed, 0);
        let n = 5 + (seed as usize * 7) % 80;
        let s: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let y = gen_pairwise_from_scores(&s, 0.1 * (seed % 3) as f64, &mut rng).unwrap();
        let m = (n * (n - 1) / 2).min(4 * n);
        let samples = sample_entries(&y, m, &mut rng).unwrap();
        let config = SolverConfig { max_iterations: 40, ..Default::default() };
        svp_complete_observed(&samples, &config, |t, f| {
            let x = f.to_dense();
            assert!(skew_defect(&x) <= 1e-10 * x.norm().max(1.0), "seed {seed} iterate {t}");
        })
        .unwrap();
    }
}

#[test]
fn fully_observed_residual_is_nonincreasing() {
    for seed in 0..10u64 {
        let mut rng = trial_rng(seed, 1);
        let n = 6 + seed as usize;
        let s: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y = gen_pairwise_from_scores(&s, 0.5, &mut rng).unwrap();
        let samples = sample_entries(&y, n * (n - 1) / 2, &mut rng).unwrap();
        let out = svp_complete(&samples, &SolverConfig { max_iterations: 20, ..Default::default() }).unwrap();
        for w in out.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", out.residual_history);
        }
    }
}

#[test]
fn noise_is_skew_with_folded_normal_mean() {
    let eps = 0.8;
    let n = 400;
    let s: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let y = gen_pairwise_from_scores(&s, eps, &mut trial_rng(3, 0)).unwrap();
    assert_eq!(skew_defect(&y), 0.0);

    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (y[(i, j)] - (s[i] - s[j])).abs();
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let mean = total / pairs;

    // Sampling oracle: |eps (z1 - z2) / 2| drawn directly.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 400_000;
    let oracle: f64 = (0..draws)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            (eps * (a - b) / 2.0).abs()
        })
        .sum::<f64>()
        / draws as f64;
    // Standard error of the mean is about 0.6 * sd / sqrt(pairs) ~ 4e-4 here.
    assert!((mean - oracle).abs() < 4e-3, "{mean} vs {oracle}");
    // Folded normal with sd eps / sqrt(2).
    assert!((mean - eps / std::f64::consts::PI.sqrt()).abs() < 4e-3);
}

#[test]
fn experiments_are_deterministic() {
    let spec = RecoveryTrialSpec {
        n: 30,
        num_samples: 300,
        noise_eps: 0.0,
        score_model: ScoreModel::UniformRandom,
        seed: 11,
        trials: 4,
    };
    let a = recovery_trial(&spec, &SolverConfig::default()).unwrap();
    let b = recovery_trial(&spec, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
    for (x, y) in a.trials.iter().zip(&b.trials) {
        assert_eq!(x.relative_error.to_bits(), y.relative_error.to_bits());
    }

    let irt = IrtSpec { num_users: 80, num_items: 12, avg_ratings_per_user: 4.0, noise_eps: 0.3, seed: 5, trials: 1 };
    assert_eq!(
        irt_trial(&irt, &SolverConfig::default(), 0).unwrap(),
        irt_trial(&irt, &SolverConfig::default(), 0).unwrap()
    );

    let y = gen_pairwise_from_scores(&[0.1, 0.5, 0.9, 0.3], 0.2, &mut trial_rng(1, 2)).unwrap();
    let s1 = sample_entries(&y, 3, &mut trial_rng(4, 0)).unwrap();
    let s2 = sample_entries(&y, 3, &mut trial_rng(4, 0)).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn binary_pipeline_is_monotone_invariant() {
    for seed in 0..4u64 {
        let mut rng = trial_rng(seed, 0);
        let centers: Vec<f64> = (0..150).map(|_| 3.0 + rand::Rng::random::<f64>(&mut rng)).collect();
        let sens: Vec<f64> = (0..150).map(|_| 0.2 + rand::Rng::random::<f64>(&mut rng)).collect();
        let quality: Vec<f64> = (0..12).map(|_| rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0).collect();
        let r = rate_items(&centers, &sens, &quality, 0.3, 0.5, &mut rng).unwrap();
        let warped = r.map_values(|v| v.ln() * 7.0 + 2.0).unwrap();
        let solver = SolverConfig::default();
        let a = completion_tau(&r, &quality, Method::Binary, &solver).unwrap();
        let b = completion_tau(&warped, &quality, Method::Binary, &solver).unwrap();
        assert_eq!(a, b);
        // Arithmetic mean keeps only translation invariance.
        let shifted = r.map_values(|v| v + 3.0).unwrap();
        assert_eq!(
            completion_tau(&r, &quality, Method::ArithmeticMean, &solver).unwrap(),
            completion_tau(&shifted, &quality, Method::ArithmeticMean, &solver).unwrap()
        );
    }
}

#[test]
fn zero_targets_return_zero_factors() {
    let samples = SampleSet::from_upper(5, [(0, 1, 0.0), (2, 4, 0.0)]).unwrap();
    let out = svp_complete(&samples, &SolverConfig::default()).unwrap();
    assert_eq!(out.residual_history, vec![0.0]);
    assert_eq!(out.factors.to_dense(), DMatrix::zeros(5, 5));
}
