use std::sync::Arc;
use std::thread;

use gva_core::data::synthetic::{synthetic_glmm, synthetic_sv};
use gva_core::engine::{
    fit_rng, read_fit_result, run_fit, stopping_check, write_fit_result, Adadelta, Algorithm, Estimator, FitConfig,
    StopDecision, StoppingRule, Termination,
};
use gva_core::linalg::{reset_touch_count, touch_count, SparsityPattern};
use gva_core::models::{GaussianTarget, GlmmFamily, TargetModel};
use proptest::prelude::*;

fn gaussian(pattern: SparsityPattern, seed: u64) -> GaussianTarget {
    GaussianTarget::random(Arc::new(pattern), &mut fit_rng(seed)).unwrap()
}

fn short(algorithm: Algorithm, seed: u64, window: usize, iterations: usize) -> FitConfig {
    FitConfig { window, max_iterations: iterations, ..FitConfig::new(algorithm, Estimator::Family2, seed) }
}

#[test]
fn stopping_rule_examples() {
    let mut rule = StoppingRule::new(3);
    let decisions: Vec<_> = [1.0, 2.0, 3.0, 2.9, 2.8, 2.7].iter().map(|v| rule.observe(*v)).collect();
    assert_eq!(decisions.iter().position(|d| *d == StopDecision::Stop), Some(5));

    let mut rule = StoppingRule::new(3);
    let trace = [1.0, 2.0, 1.9, 2.1, 1.8, 1.7, 1.6];
    let mut counts = Vec::new();
    for v in trace {
        let decision = rule.observe(v);
        counts.push(rule.below_count());
        if decision == StopDecision::Stop {
            break;
        }
    }
    assert_eq!(counts, vec![0, 0, 1, 0, 1, 2, 3]);
    assert_eq!(stopping_check(&(1..100).map(f64::from).collect::<Vec<_>>(), 3), StopDecision::Continue);
}

#[test]
fn fits_are_bit_identical_for_a_seed_and_differ_across_seeds() {
    let target = gaussian(SparsityPattern::ssm(9, 1, 3).unwrap(), 1);
    let config = short(Algorithm::Alg2Sparse, 7, 200, 2000);
    let a = run_fit(&target, &config).unwrap();
    let b = run_fit(&target, &config).unwrap();
    assert_eq!(a, b);
    let c = run_fit(&target, &FitConfig { seed: 8, ..config }).unwrap();
    assert_ne!(a.mu, c.mu);
}

#[test]
fn concurrent_fits_match_sequential_ones() {
    let target = Arc::new(gaussian(SparsityPattern::glmm(6, 2, 2).unwrap(), 2));
    let configs: Vec<FitConfig> = (0..4).map(|seed| short(Algorithm::Alg2Sparse, seed, 100, 1000)).collect();
    let sequential: Vec<_> = configs.iter().map(|c| run_fit(target.as_ref(), c).unwrap()).collect();
    let handles: Vec<_> = configs
        .into_iter()
        .map(|c| {
            let target = Arc::clone(&target);
            thread::spawn(move || run_fit(target.as_ref(), &c).unwrap())
        })
        .collect();
    let parallel: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(sequential, parallel);
}

#[test]
fn pattern_is_structural_and_diagonal_stays_positive() {
    let model = synthetic_glmm(GlmmFamily::BernoulliLogit, 20, 5, 3).unwrap();
    for algorithm in [Algorithm::Alg1MeanField, Algorithm::Alg1Unrestricted, Algorithm::Alg2Sparse] {
        let result = run_fit(&model, &short(algorithm, 0, 500, 5000)).unwrap();
        assert_eq!(result.factor.pattern(), &algorithm.pattern_for(&model).unwrap());
        let pattern = result.factor.pattern();
        assert!((0..pattern.dim()).all(|j| result.factor.diag(j) > 0.0));
        assert_eq!(result.lbar_trace.len(), result.iterations / result.window);
    }
}

#[test]
fn sparse_iteration_cost_is_affine_in_the_series_length() {
    let mut per_iter = Vec::new();
    for n in [100, 200, 300] {
        let model = synthetic_sv(n, 4).unwrap();
        reset_touch_count();
        let result = run_fit(&model, &short(Algorithm::Alg2Sparse, 0, 50, 50)).unwrap();
        assert_eq!(result.iterations, 50);
        per_iter.push(touch_count() / 50);
        assert_eq!(touch_count() % 50, 0);
    }
    assert_eq!(per_iter[1] - per_iter[0], per_iter[2] - per_iter[1]);

    // the unrestricted factor grows with the square of the dimension
    let mut dense = Vec::new();
    for n in [20, 40] {
        let model = synthetic_sv(n, 4).unwrap();
        let nnz = Algorithm::Alg1Unrestricted.pattern_for(&model).unwrap().nnz();
        reset_touch_count();
        let result = run_fit(&model, &short(Algorithm::Alg1Unrestricted, 0, 10, 10)).unwrap();
        dense.push(touch_count() as f64 / result.iterations as f64 / nnz as f64);
    }
    assert!((dense[0] - dense[1]).abs() < 1e-12, "touches per stored entry {dense:?}");
}

#[test]
fn gaussian_targets_are_recovered() {
    for pattern in [SparsityPattern::ssm(17, 1, 3).unwrap(), SparsityPattern::glmm(17, 1, 3).unwrap()] {
        let target = gaussian(pattern, 5);
        let result = run_fit(&target, &FitConfig::new(Algorithm::Alg2Sparse, Estimator::Family2, 0)).unwrap();
        assert_eq!(result.termination, Termination::StoppedByCriterion);
        let mu_err = result.mu.iter().zip(target.mean()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(mu_err < 0.05, "mean error {mu_err}");
    }
}

#[test]
fn fit_results_survive_the_text_format() {
    let model = synthetic_sv(30, 6).unwrap();
    let result = run_fit(&model, &short(Algorithm::Alg2Sparse, 3, 100, 300)).unwrap();
    let mut buf = Vec::new();
    write_fit_result(&result, &mut buf).unwrap();
    assert_eq!(read_fit_result(buf.as_slice()).unwrap(), result);
    assert_eq!(model.dim(), result.mu.len());
}

/// Index at which a trace first has `m` consecutive values strictly below the
/// maximum of everything before them.
fn first_stop(trace: &[f64], m: usize) -> Option<usize> {
    (0..trace.len()).find(|&i| {
        i + 1 > m
            && (0..m).all(|back| {
                let j = i - back;
                let before = trace[..j].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                trace[j] < before
            })
    })
}

proptest! {
    #[test]
    fn stopping_rule_matches_its_definition(trace in proptest::collection::vec(-5i32..5, 1..40), m in 1usize..5) {
        let trace: Vec<f64> = trace.into_iter().map(f64::from).collect();
        let mut rule = StoppingRule::new(m);
        let stop = trace.iter().position(|v| rule.observe(*v) == StopDecision::Stop);
        prop_assert_eq!(stop, first_stop(&trace, m));
    }

    #[test]
    fn adadelta_steps_follow_the_gradient_sign(g in proptest::collection::vec(-1e3f64..1e3, 1..8), steps in 1usize..50) {
        let mut acc = Adadelta::new(g.len());
        for _ in 0..steps {
            let delta = acc.step(&g);
            for (d, gi) in delta.iter().zip(&g) {
                prop_assert!(d.signum() == gi.signum() || *gi == 0.0);
                prop_assert!(*gi != 0.0 || *d == 0.0);
            }
        }
        prop_assert!(acc.mean_sq_grad().iter().chain(acc.mean_sq_delta()).all(|v| *v >= 0.0));
    }

    #[test]
    fn trace_length_is_completed_windows(window in 1usize..40, extra in 0usize..120, seed in 0u64..50) {
        let target = gaussian(SparsityPattern::ssm(4, 1, 1).unwrap(), seed);
        let result = run_fit(&target, &short(Algorithm::Alg2Sparse, seed, window, window + extra)).unwrap();
        prop_assert_eq!(result.lbar_trace.len(), result.iterations / window);
    }
}
