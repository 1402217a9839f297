mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssn_core::svm::{predict, rbf_kernel, train_svm, SvmParams};
use ssn_core::Error;
use support::*;

fn point_set(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let labels = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    (points, labels)
}

/// Multiplier of every training point recovered from the model's support vectors.
fn training_alphas(points: &[Vec<f64>], sv: &[Vec<f64>], signed: &[f64]) -> Vec<f64> {
    points
        .iter()
        .map(|p| sv.iter().zip(signed).find(|(s, _)| *s == p).map_or(0.0, |(_, a)| a.abs()))
        .collect()
}

#[test]
fn smo_matches_exhaustive_dual_on_all_small_subsets() {
    let (points, labels) = point_set(99, 8);
    let (c, gamma, tol) = (2.0, 0.7, 1e-3);
    let mut checked = 0;
    for mask in 1u32..(1 << 8) {
        let idx: Vec<usize> = (0..8).filter(|i| mask & (1 << i) != 0).collect();
        let x: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
        let y: Vec<i8> = idx.iter().map(|&i| labels[i]).collect();
        if !(y.contains(&1) && y.contains(&-1)) {
            assert!(train_svm(&x, &y, &SvmParams::new(c, gamma)).is_err());
            continue;
        }
        let (model, summary) = train_svm(&x, &y, &SvmParams { tol, ..SvmParams::new(c, gamma) }).unwrap();
        assert!(summary.converged);
        let (best, _) = brute_force_dual(&x, &y, c, gamma);
        let got = model.dual_objective();
        assert!((got - best).abs() < 1e-4, "subset {mask:08b}: smo {got} exhaustive {best}");

        let alpha = training_alphas(&x, &model.support_vectors, &model.alphas);
        let eq: f64 = alpha.iter().zip(&y).map(|(a, &l)| a * l as f64).sum();
        assert!(eq.abs() < 1e-9);
        for (i, xi) in x.iter().enumerate() {
            let margin = y[i] as f64 * model.decision(xi);
            let a = alpha[i];
            assert!((-1e-12..=c + 1e-12).contains(&a));
            if a <= 1e-12 {
                assert!(margin >= 1.0 - tol, "subset {mask:08b} point {i}: margin {margin}");
            } else if a >= c - 1e-12 {
                assert!(margin <= 1.0 + tol, "subset {mask:08b} point {i}: margin {margin}");
            } else {
                assert!((margin - 1.0).abs() <= tol, "subset {mask:08b} point {i}: margin {margin}");
            }
        }
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn gram_matrix_is_positive_semidefinite() {
    let (points, _) = point_set(3, 12);
    for &gamma in &[0.01, 0.5, 10.0] {
        let k = gram(&points, gamma);
        for (i, row) in k.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, rbf_kernel(&points[i], &points[j], gamma).unwrap());
            }
        }
        let min = symmetric_eigenvalues(k).into_iter().fold(f64::INFINITY, f64::min);
        assert!(min > -1e-10, "gamma {gamma}: {min}");
    }
}

#[test]
fn duplicating_the_training_set_keeps_the_decision_function() {
    let (points, labels) = point_set(5, 10);
    let params = SvmParams {
        tol: 1e-9,
        ..SvmParams::new(5.0, 0.8)
    };
    let (single, _) = train_svm(&points, &labels, &params).unwrap();
    let doubled: Vec<Vec<f64>> = points.iter().chain(&points).cloned().collect();
    let doubled_labels: Vec<i8> = labels.iter().chain(&labels).copied().collect();
    let doubled_params = SvmParams {
        c: params.c / 2.0,
        ..params
    };
    let (twice, _) = train_svm(&doubled, &doubled_labels, &doubled_params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        let q = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        assert!((single.decision(&q) - twice.decision(&q)).abs() < 1e-6);
    }
}

#[test]
fn separates_well_spaced_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..200 {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        x.push(vec![2.0 * s + rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]);
        y.push(if s > 0.0 { 1 } else { -1 });
    }
    let (model, _) = train_svm(&x, &y, &SvmParams::new(10.0, 0.5)).unwrap();
    let flat: Vec<f64> = x.iter().flatten().copied().collect();
    assert_eq!(predict(&model, &flat).unwrap().labels, y);
}

#[test]
fn seed_does_not_change_the_optimum() {
    let (points, labels) = point_set(12, 30);
    let objective = |seed| {
        let params = SvmParams {
            seed,
            tol: 1e-6,
            ..SvmParams::new(1.0, 1.0)
        };
        train_svm(&points, &labels, &params).unwrap().0.dual_objective()
    };
    let base = objective(0);
    for seed in 1..5 {
        assert!((objective(seed) - base).abs() < 1e-6);
    }
}

#[test]
fn single_class_is_rejected() {
    let x = vec![vec![0.0], vec![1.0]];
    assert!(matches!(train_svm(&x, &[1, 1], &SvmParams::new(1.0, 1.0)), Err(Error::SingleClass)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_symmetric_and_bounded(
        a in prop::collection::vec(-5.0f64..5.0, 4),
        b in prop::collection::vec(-5.0f64..5.0, 4),
        gamma in 0.001f64..5.0,
    ) {
        let k = rbf_kernel(&a, &b, gamma).unwrap();
        prop_assert_eq!(k, rbf_kernel(&b, &a, gamma).unwrap());
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert_eq!(rbf_kernel(&a, &a, gamma).unwrap(), 1.0);
    }

    #[test]
    fn training_respects_box_and_equality(seed in 0u64..200, c in 0.1f64..20.0) {
        let (points, labels) = point_set(seed, 16);
        let (model, _) = train_svm(&points, &labels, &SvmParams::new(c, 0.5)).unwrap();
        let sum: f64 = model.alphas.iter().sum();
        prop_assert!(sum.abs() < 1e-9);
        prop_assert!(model.alphas.iter().all(|a| a.abs() <= c + 1e-12 && *a != 0.0));
    }
}
