mod support;

use nalgebra::{DMatrix, SymmetricEigen};
use prefgp::gp_pref::{likelihood_grad_hess, log_likelihood};
use prefgp::kernel::gram_matrix;
use prefgp::{fit, Error, FeatureVector, GpPosterior, KernelConfig, KernelKind, Preference, PreferenceDatum};
use proptest::prelude::*;
use rand::Rng;
use std::time::Instant;
use support::{fv, nelder_mead, phi_integral, random_data, random_points, rng};

fn rbf(d: usize) -> KernelConfig {
    KernelConfig::default_for(KernelKind::AnchoredRbf, d)
}

/// Mode of the exact log posterior by derivative-free search in whitened
/// coordinates `f = L z`, with the likelihood built from an integrated Φ.
fn reference_mode(points: &[FeatureVector], data: &[PreferenceDatum], kernel: &KernelConfig, sigma: f64) -> Vec<f64> {
    let n = points.len();
    let k = gram_matrix(points, kernel).unwrap();
    let l = k.clone().cholesky().unwrap().l();
    let to_f = |z: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..=i).map(|j| l[(i, j)] * z[j]).sum()).collect() };
    let neg_log_post = |z: &[f64]| -> f64 {
        let f = to_f(z);
        let ll: f64 = data
            .iter()
            .map(|d| {
                let diff = f[d.first] - f[d.second];
                let s = if d.response == Preference::First { 1.0 } else { -1.0 };
                phi_integral(s * diff / (2f64.sqrt() * sigma)).ln()
            })
            .sum();
        -(ll - 0.5 * z.iter().map(|v| v * v).sum::<f64>())
    };
    to_f(&nelder_mead(&neg_log_post, &vec![0.0; n], 0.5, 1e-10))
}

#[test]
fn one_query_mode_matches_direct_maximization() {
    let points = vec![fv(&[0.8]), fv(&[0.2])];
    let data = vec![PreferenceDatum::new(0, 1, Preference::First).unwrap()];
    let kernel = rbf(1);
    let model = fit(points.clone(), data.clone(), kernel.clone(), 1.0).unwrap();
    let want = reference_mode(&points, &data, &kernel, 1.0);
    for (got, want) in model.mode().iter().zip(&want) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert!(model.mode()[0] > 0.0 && model.mode()[1] < 0.0);
}

#[test]
fn random_small_problems_match_direct_maximization() {
    let started = Instant::now();
    let mut r = rng(21);
    for case in 0..20 {
        let n = r.random_range(2..=4);
        let count = r.random_range(1..=3);
        let d = r.random_range(1..=3);
        let sigma = r.random_range(0.3..2.0);
        let points = random_points(&mut r, n, d);
        let data = random_data(&mut r, n, count);
        let kernel = KernelConfig::anchored_rbf(r.random_range(0.5..4.0), fv(&vec![0.5; d])).unwrap();
        let model = fit(points.clone(), data.clone(), kernel.clone(), sigma).unwrap();
        let want = reference_mode(&points, &data, &kernel, sigma);
        for (got, want) in model.mode().iter().zip(&want) {
            assert!((got - want).abs() < 1e-3, "case {case}: {got} vs {want}");
        }
    }
    assert!(started.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn log_likelihood_examples() {
    let one = [PreferenceDatum::new(0, 1, Preference::First).unwrap()];
    assert!((log_likelihood(&[0.3, 0.3], &one, 1.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    let sigma = 0.7;
    let v = log_likelihood(&[2f64.sqrt() * sigma, 0.0], &one, sigma).unwrap();
    assert!((v - -0.17275377902344989).abs() < 1e-12);
    let two = [
        PreferenceDatum::new(0, 1, Preference::First).unwrap(),
        PreferenceDatum::new(2, 3, Preference::Second).unwrap(),
    ];
    assert!((log_likelihood(&[1.0, 1.0, -2.0, -2.0], &two, 1.0).unwrap() - 2.0 * 0.5f64.ln()).abs() < 1e-15);
    let extreme = log_likelihood(&[0.0, 40.0 * 2f64.sqrt()], &one, 1.0).unwrap();
    assert!(extreme.is_finite() && (extreme - -804.6084420137538).abs() < 1e-9);
    assert!(log_likelihood(&[0.0], &one, 1.0).is_err());
}

#[test]
fn zero_data_gradient_and_hessian_vanish() {
    let (g, w) = likelihood_grad_hess(&[0.4, -1.0, 2.0], &[], 1.0).unwrap();
    assert!(g.iter().all(|v| *v == 0.0));
    assert!(w.iter().all(|v| *v == 0.0));
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let mut r = rng(22);
    for _ in 0..50 {
        let n = r.random_range(2..=6);
        let count = r.random_range(1..=8);
        let sigma = r.random_range(0.3..3.0);
        let data = random_data(&mut r, n, count);
        let f: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let (grad, w) = likelihood_grad_hess(&f, &data, sigma).unwrap();
        let ll = |x: &[f64]| log_likelihood(x, &data, sigma).unwrap();
        let shifted = |moves: &[(usize, f64)]| {
            let mut x = f.clone();
            for &(i, h) in moves {
                x[i] += h;
            }
            ll(&x)
        };
        let h = 1e-5;
        for i in 0..n {
            let fd = (shifted(&[(i, h)]) - shifted(&[(i, -h)])) / (2.0 * h);
            assert!((grad[i] - fd).abs() < 1e-6, "gradient {i}: {} vs {fd}", grad[i]);
        }
        let h = 1e-3;
        for i in 0..n {
            for j in 0..n {
                let fd = (shifted(&[(i, h), (j, h)]) - shifted(&[(i, h), (j, -h)]) - shifted(&[(i, -h), (j, h)])
                    + shifted(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                assert!((-w[(i, j)] - fd).abs() < 1e-4, "hessian ({i},{j}): {} vs {fd}", -w[(i, j)]);
            }
        }
        assert_eq!(w.clone(), w.transpose());
        assert!(SymmetricEigen::new(w).eigenvalues.min() >= -1e-12);
    }
}

fn random_model(seed: u64) -> (GpPosterior, Vec<FeatureVector>, Vec<PreferenceDatum>) {
    let mut r = rng(seed);
    let d = r.random_range(1..=4);
    let n = r.random_range(2..=12);
    let points = random_points(&mut r, n, d);
    let count = r.random_range(1..=20);
    let data = random_data(&mut r, n, count);
    let sigma = r.random_range(0.2..2.0);
    let model = fit(points.clone(), data.clone(), rbf(d), sigma).unwrap();
    (model, points, data)
}

#[test]
fn fitted_models_are_stationary_and_anchored() {
    for seed in 0..40 {
        let (model, _, _) = random_model(seed);
        let scale = model.alpha().amax().max(1.0);
        assert!(model.stationarity_residual() <= 1e-8 * scale, "seed {seed}");
        let anchor = FeatureVector::splat(model.dim(), 0.5);
        let (mean, var) = model.predict_point(&anchor).unwrap();
        assert_eq!(mean, 0.0);
        assert!(var <= 1e-9);
        let post = model.posterior_covariance();
        let min = SymmetricEigen::new(post).eigenvalues.min();
        assert!(min >= -1e-9, "seed {seed}: {min}");
    }
}

#[test]
fn swapping_members_and_answers_leaves_the_mode_unchanged() {
    for seed in 100..120 {
        let (model, points, data) = random_model(seed);
        let swapped: Vec<PreferenceDatum> = data
            .iter()
            .map(|d| PreferenceDatum::new(d.second, d.first, d.response.flipped()).unwrap())
            .collect();
        let again = fit(points, swapped, model.kernel().clone(), model.sigma()).unwrap();
        for (a, b) in model.mode().iter().zip(again.mode().iter()) {
            assert!((a - b).abs() <= 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn flipping_every_answer_negates_the_mode() {
    for seed in 200..220 {
        let (model, points, data) = random_model(seed);
        let flipped: Vec<PreferenceDatum> = data
            .iter()
            .map(|d| PreferenceDatum::new(d.first, d.second, d.response.flipped()).unwrap())
            .collect();
        let neg = fit(points, flipped, model.kernel().clone(), model.sigma()).unwrap();
        for (a, b) in model.mode().iter().zip(neg.mode().iter()) {
            assert!((a + b).abs() <= 1e-8, "seed {seed}");
        }
    }
}

#[test]
fn refits_are_bit_identical() {
    for seed in 300..310 {
        let (model, points, data) = random_model(seed);
        let again = fit(points, data, model.kernel().clone(), model.sigma()).unwrap();
        assert_eq!(model.mode(), again.mode());
    }
}

#[test]
fn prediction_at_a_training_point_recovers_the_mode() {
    for seed in 400..420 {
        let (model, points, _) = random_model(seed);
        for (i, p) in points.iter().enumerate() {
            let pred = model.predict_pair(p, &points[(i + 1) % points.len()]).unwrap();
            assert!((pred.mean[0] - model.mode()[i]).abs() < 1e-6, "seed {seed} point {i}");
        }
    }
}

#[test]
fn zero_data_prediction_is_the_prior() {
    let model = GpPosterior::prior(rbf(2), 1.0).unwrap();
    let (a, b) = (fv(&[0.1, 0.9]), fv(&[0.7, 0.3]));
    let pred = model.predict_pair(&a, &b).unwrap();
    let k = model.kernel();
    assert_eq!(pred.mean, [0.0, 0.0]);
    assert_eq!(pred.cov[0][0], k.eval(&a, &a).unwrap());
    assert_eq!(pred.cov[1][1], k.eval(&b, &b).unwrap());
    assert_eq!(pred.cov[0][1], k.eval(&a, &b).unwrap());
    assert!(model.mode().is_empty());
    let anchor = FeatureVector::splat(2, 0.5);
    let at_anchor = model.predict_pair(&anchor, &anchor).unwrap();
    assert_eq!(at_anchor.mean, [0.0, 0.0]);
    assert!(at_anchor.cov.iter().flatten().all(|v| v.abs() <= 1e-9));
}

#[test]
fn updates_move_the_mean_difference_toward_the_answer() {
    let mut r = rng(23);
    for _ in 0..30 {
        let (model, _, _) = random_model(r.random());
        let pts = random_points(&mut r, 2, model.dim());
        let answer = Preference::from_first_preferred(r.random());
        let before = model.predict_pair(&pts[0], &pts[1]).unwrap();
        let after_model = model.update_pair(&pts[0], &pts[1], answer).unwrap();
        let after = after_model.predict_pair(&pts[0], &pts[1]).unwrap();
        let delta = (after.mean[0] - after.mean[1]) - (before.mean[0] - before.mean[1]);
        match answer {
            Preference::First => assert!(delta > 0.0),
            Preference::Second => assert!(delta < 0.0),
        }
        let twice = after_model.update_pair(&pts[0], &pts[1], answer).unwrap();
        let g_once = after.difference_variance();
        let g_twice = twice.predict_pair(&pts[0], &pts[1]).unwrap().difference_variance();
        assert!(g_twice < g_once, "{g_twice} !< {g_once}");
        // The original is untouched.
        assert_eq!(model.predict_pair(&pts[0], &pts[1]).unwrap(), before);
    }
}

#[test]
fn update_of_empty_model_equals_direct_fit() {
    let (a, b) = (fv(&[0.2, 0.3]), fv(&[0.9, 0.1]));
    let via_update = GpPosterior::prior(rbf(2), 1.0).unwrap().update_pair(&a, &b, Preference::Second).unwrap();
    let direct = fit(vec![a.clone(), b.clone()], vec![PreferenceDatum::new(0, 1, Preference::Second).unwrap()], rbf(2), 1.0)
        .unwrap();
    assert_eq!(via_update.mode(), direct.mode());
    assert_eq!(via_update.points(), direct.points());
}

#[test]
fn repeated_points_are_deduplicated() {
    let (a, b, c) = (fv(&[0.2, 0.3]), fv(&[0.9, 0.1]), fv(&[0.4, 0.4]));
    let model = GpPosterior::prior(rbf(2), 1.0)
        .unwrap()
        .update_pair(&a, &b, Preference::First)
        .unwrap()
        .update_pair(&b, &c, Preference::First)
        .unwrap()
        .update_pair(&a, &b, Preference::Second)
        .unwrap();
    assert_eq!(model.points().len(), 3);
    assert_eq!(model.data().len(), 3);
    assert!(matches!(model.update_pair(&a, &a, Preference::First), Err(Error::InvalidQuery(_))));
}

#[test]
fn duplicate_points_given_directly_are_degenerate() {
    let p = fv(&[0.3, 0.6]);
    let data = vec![PreferenceDatum::new(0, 1, Preference::First).unwrap()];
    let err = fit(vec![p.clone(), p], data, rbf(2).with_jitter(0.0).unwrap(), 1.0).unwrap_err();
    assert!(matches!(err, Error::Degenerate(_)), "{err}");
}

#[test]
fn linear_kernel_fit_is_a_linear_function() {
    let mut r = rng(24);
    let points = random_points(&mut r, 8, 2);
    let data = random_data(&mut r, 8, 12);
    let model = fit(points.clone(), data, KernelConfig::default_for(KernelKind::Linear, 2), 1.0).unwrap();
    // Mean is w·(x − anchor): recover w from two points and check the rest.
    let probe = |x: &[f64]| model.predict_point(&fv(x)).unwrap().0;
    let w = [probe(&[1.5, 0.5]), probe(&[0.5, 1.5])];
    for p in &points {
        let want = w[0] * (p[0] - 0.5) + w[1] * (p[1] - 0.5);
        assert!((probe(p.as_slice()) - want).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predictive_covariance_is_symmetric_with_nonnegative_diagonal(seed in any::<u64>()) {
        let (model, _, _) = random_model(seed % 1000);
        let mut r = rng(seed);
        let pts = random_points(&mut r, 2, model.dim());
        let pred = model.predict_pair(&pts[0], &pts[1]).unwrap();
        prop_assert_eq!(pred.cov[0][1], pred.cov[1][0]);
        prop_assert!(pred.cov[0][0] >= 0.0 && pred.cov[1][1] >= 0.0);
        let c = DMatrix::from_row_slice(2, 2, &[pred.cov[0][0], pred.cov[0][1], pred.cov[1][0], pred.cov[1][1]]);
        prop_assert!(SymmetricEigen::new(c).eigenvalues.min() >= -1e-9);
    }
}
