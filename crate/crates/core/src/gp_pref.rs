//! Preference-based GP regression under the probit choice model.
//!
//! The posterior over reward values at the unique training points is
//! approximated by a Gaussian centered at the MAP mode `f̂` with covariance
//! `(K⁻¹ + W)⁻¹`, where `W` is the negative Hessian of the log-likelihood at
//! the mode (Laplace approximation).
//!
//! The mode search runs Newton's method in the coordinates `a = K⁻¹ f`. That
//! keeps the iteration free of explicit inverses of `K`, which is badly
//! conditioned for the linear kernel and near the anchor:
//!
//! ```text
//! a ← (I + W K)⁻¹ (W f + ∇ log p(q | f)),   f = K a
//! ```
//!
//! The gradient of the log posterior in `f` is simply `∇ log p(q | f) − a`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, FeatureVector, KernelConfig};
use crate::probit::{log_norm_cdf, log_norm_cdf_derivs};

/// Stationarity tolerance on `‖∇ log p(q|f) − K⁻¹f‖∞`, relative to
/// `max(1, ‖K⁻¹f‖∞)` because `K⁻¹f` carries rounding error proportional to its
/// size when points nearly coincide.
pub const MODE_TOLERANCE: f64 = 1e-8;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
pub const MAX_STEP_HALVINGS: usize = 30;
const OBJECTIVE_SLACK: f64 = 1e-13;
/// Coordinates closer than this (max-norm) are treated as the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-12;
/// Negative predicted variances down to this magnitude are rounding noise.
pub const VARIANCE_CLAMP: f64 = 1e-9;

pub const DEFAULT_SIGMA: f64 = 1.0;

/// Which member of a compared pair the user chose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
}

impl Preference {
    pub fn from_first_preferred(first: bool) -> Self {
        if first {
            Preference::First
        } else {
            Preference::Second
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Preference::First => Preference::Second,
            Preference::Second => Preference::First,
        }
    }

    /// `q` in {0, 1}, with 1 meaning the first member was preferred.
    pub fn as_bit(self) -> u8 {
        match self {
            Preference::First => 1,
            Preference::Second => 0,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Preference::First => 1.0,
            Preference::Second => -1.0,
        }
    }
}

/// One answered comparison between two entries of a point table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceDatum {
    pub first: usize,
    pub second: usize,
    pub response: Preference,
}

impl PreferenceDatum {
    pub fn new(first: usize, second: usize, response: Preference) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidQuery(format!(
                "self-comparison of point {first} carries no information"
            )));
        }
        Ok(Self { first, second, response })
    }

    /// Signed probit argument `±(f[first] − f[second]) / (√2 σ)`.
    fn z(&self, f: &[f64], sigma: f64) -> f64 {
        self.response.sign() * (f[self.first] - f[self.second]) / (SQRT_2 * sigma)
    }
}

fn check_indices(data: &[PreferenceDatum], n: usize) -> Result<()> {
    for (k, d) in data.iter().enumerate() {
        if d.first >= n || d.second >= n {
            return Err(Error::InvalidInput(format!(
                "datum {k} references point ({}, {}) outside a table of {n}",
                d.first, d.second
            )));
        }
        if d.first == d.second {
            return Err(Error::InvalidQuery(format!("datum {k} compares point {} with itself", d.first)));
        }
    }
    Ok(())
}

/// `Σᵢ ln Φ(zᵢ)` with `zᵢ = ±(f[first] − f[second]) / (√2 σ)`.
pub fn log_likelihood(f: &[f64], data: &[PreferenceDatum], sigma: f64) -> Result<f64> {
    check_indices(data, f.len())?;
    Ok(log_likelihood_unchecked(f, data, sigma))
}

fn log_likelihood_unchecked(f: &[f64], data: &[PreferenceDatum], sigma: f64) -> f64 {
    data.iter().map(|d| log_norm_cdf(d.z(f, sigma))).sum()
}

/// Gradient of the log-likelihood and `W`, its negative Hessian.
///
/// Each datum touches only the 2×2 block of its two point indices, and that
/// block is `c · [[1, −1], [−1, 1]]` with `c ≥ 0`, so `W` is PSD.
pub fn likelihood_grad_hess(f: &[f64], data: &[PreferenceDatum], sigma: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_indices(data, f.len())?;
    Ok(grad_hess_unchecked(f, data, sigma))
}

fn grad_hess_unchecked(f: &[f64], data: &[PreferenceDatum], sigma: f64) -> (DVector<f64>, DMatrix<f64>) {
    let n = f.len();
    let mut grad = DVector::zeros(n);
    let mut w = DMatrix::zeros(n, n);
    let scale = SQRT_2 * sigma;
    for d in data {
        let (first_deriv, second_deriv) = log_norm_cdf_derivs(d.z(f, sigma));
        let g = d.response.sign() * first_deriv / scale;
        grad[d.first] += g;
        grad[d.second] -= g;
        let c = -second_deriv / (scale * scale);
        w[(d.first, d.first)] += c;
        w[(d.second, d.second)] += c;
        w[(d.first, d.second)] -= c;
        w[(d.second, d.first)] -= c;
    }
    (grad, w)
}

/// Posterior mean and covariance of `(f(a), f(b))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPrediction {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl PairPrediction {
    /// Variance of `f(a) − f(b)`, clamped at zero.
    pub fn difference_variance(&self) -> f64 {
        (self.cov[0][0] + self.cov[1][1] - 2.0 * self.cov[0][1]).max(0.0)
    }
}

fn clamp_variance(v: f64) -> f64 {
    if (-VARIANCE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// Laplace-approximated GP posterior over rewards given pairwise preferences.
///
/// Immutable once built; [`GpPosterior::update`] returns a new posterior.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: KernelConfig,
    sigma: f64,
    points: Vec<FeatureVector>,
    data: Vec<PreferenceDatum>,
    gram: DMatrix<f64>,
    mode: DVector<f64>,
    /// `K⁻¹ f̂`
    alpha: DVector<f64>,
    w: DMatrix<f64>,
    /// `(I + W K)⁻¹ W`, the correction term of the predictive covariance.
    correction: DMatrix<f64>,
    iterations: usize,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")))
    }
}

/// Fit the Laplace posterior for `data` over the point table `points`.
pub fn fit(
    points: Vec<FeatureVector>,
    data: Vec<PreferenceDatum>,
    kernel: KernelConfig,
    sigma: f64,
) -> Result<GpPosterior> {
    check_sigma(sigma)?;
    let kernel = kernel.validated()?;
    for p in &points {
        kernel.check_dim(p)?;
    }
    check_indices(&data, points.len())?;
    let n = points.len();
    if n == 0 {
        return Ok(GpPosterior {
            kernel,
            sigma,
            points,
            data,
            gram: DMatrix::zeros(0, 0),
            mode: DVector::zeros(0),
            alpha: DVector::zeros(0),
            w: DMatrix::zeros(0, 0),
            correction: DMatrix::zeros(0, 0),
            iterations: 0,
        });
    }
    let gram = gram_matrix(&points, &kernel)?;
    let (alpha, mode, iterations) = find_mode(&gram, &data, sigma)?;
    let (_, w) = grad_hess_unchecked(mode.as_slice(), &data, sigma);
    let correction = solve_shifted(&gram, &w, &w)?;
    Ok(GpPosterior {
        kernel,
        sigma,
        points,
        data,
        gram,
        mode,
        alpha,
        w,
        correction,
        iterations,
    })
}

/// Solve `(I + W K) X = rhs`.
fn solve_shifted(gram: &DMatrix<f64>, w: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = gram.nrows();
    let system = DMatrix::identity(n, n) + w * gram;
    system
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Degenerate("I + W K is singular".into()))
}

fn log_posterior(alpha: &DVector<f64>, f: &DVector<f64>, data: &[PreferenceDatum], sigma: f64) -> f64 {
    log_likelihood_unchecked(f.as_slice(), data, sigma) - 0.5 * alpha.dot(f)
}

fn find_mode(
    gram: &DMatrix<f64>,
    data: &[PreferenceDatum],
    sigma: f64,
) -> Result<(DVector<f64>, DVector<f64>, usize)> {
    let n = gram.nrows();
    let mut alpha = DVector::zeros(n);
    let mut f = DVector::zeros(n);
    let mut objective = log_posterior(&alpha, &f, data, sigma);
    let mut grad_norm = f64::INFINITY;

    for iteration in 0..=MAX_NEWTON_ITERATIONS {
        let (grad, w) = grad_hess_unchecked(f.as_slice(), data, sigma);
        grad_norm = (&grad - &alpha).amax();
        if grad_norm <= MODE_TOLERANCE * alpha.amax().max(1.0) {
            log::trace!("mode found after {iteration} Newton steps");
            return Ok((alpha, f, iteration));
        }
        if iteration == MAX_NEWTON_ITERATIONS {
            break;
        }

        let rhs = &w * &f + &grad;
        let target = solve_shifted(gram, &w, &DMatrix::from_column_slice(n, 1, rhs.as_slice()))?;
        let direction = DVector::from_column_slice(target.as_slice()) - &alpha;

        // Near the mode the objective is flat to rounding, so a full Newton
        // step may look like a tiny loss; allow that much slack.
        let slack = OBJECTIVE_SLACK * (1.0 + objective.abs());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_STEP_HALVINGS {
            let trial_alpha = &alpha + step * &direction;
            let trial_f = gram * &trial_alpha;
            let trial_objective = log_posterior(&trial_alpha, &trial_f, data, sigma);
            if trial_objective >= objective - slack {
                alpha = trial_alpha;
                f = trial_f;
                objective = trial_objective;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // At the floating-point floor of the objective; the gradient
            // check above decides whether that is good enough.
            log::debug!("line search stalled at iteration {iteration}, gradient {grad_norm:e}");
            break;
        }
    }
    Err(Error::FitFailure {
        iterations: MAX_NEWTON_ITERATIONS,
        grad_norm,
    })
}

impl GpPosterior {
    /// Posterior with no points and no data: the anchored GP prior.
    pub fn prior(kernel: KernelConfig, sigma: f64) -> Result<Self> {
        fit(Vec::new(), Vec::new(), kernel, sigma)
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn points(&self) -> &[FeatureVector] {
        &self.points
    }

    pub fn data(&self) -> &[PreferenceDatum] {
        &self.data
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// MAP estimate `f̂` at the unique training points.
    pub fn mode(&self) -> &DVector<f64> {
        &self.mode
    }

    /// `K⁻¹ f̂`, maintained by the mode search.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// `(I + W K)⁻¹ W`.
    pub fn correction(&self) -> &DMatrix<f64> {
        &self.correction
    }

    pub fn newton_iterations(&self) -> usize {
        self.iterations
    }

    /// Laplace posterior covariance at the training points, `K − K (I + W K)⁻¹ W K`.
    pub fn posterior_covariance(&self) -> DMatrix<f64> {
        &self.gram - &self.gram * &self.correction * &self.gram
    }

    /// `‖∇ log p(q|f) − K⁻¹ f‖∞` at the stored mode.
    pub fn stationarity_residual(&self) -> f64 {
        let (grad, _) = grad_hess_unchecked(self.mode.as_slice(), &self.data, self.sigma);
        (grad - &self.alpha).amax()
    }

    /// Kernel row `k(x, pᵢ)` against the training points.
    pub(crate) fn cross_row(&self, x: &FeatureVector) -> DVector<f64> {
        DVector::from_iterator(
            self.points.len(),
            self.points.iter().map(|p| self.kernel.eval_slices(x.as_slice(), p.as_slice())),
        )
    }

    pub(crate) fn point_moments(&self, x: &FeatureVector) -> PointMoments {
        let k = self.cross_row(x);
        let u = self.correction.tr_mul(&k);
        let prior_var = self.kernel.eval_slices(x.as_slice(), x.as_slice());
        PointMoments {
            mean: k.dot(&self.alpha),
            var_reduction: u.dot(&k),
            prior_var,
            k,
            u,
        }
    }

    /// Posterior mean and variance of `f(x)`.
    pub fn predict_point(&self, x: &FeatureVector) -> Result<(f64, f64)> {
        self.kernel.check_dim(x)?;
        let m = self.point_moments(x);
        Ok((m.mean, clamp_variance(m.prior_var - m.var_reduction)))
    }

    /// Joint posterior of `(f(a), f(b))`.
    pub fn predict_pair(&self, a: &FeatureVector, b: &FeatureVector) -> Result<PairPrediction> {
        self.kernel.check_dim(a)?;
        self.kernel.check_dim(b)?;
        let ma = self.point_moments(a);
        let mb = self.point_moments(b);
        let prior_cov = self.kernel.eval_slices(a.as_slice(), b.as_slice());
        let raw = RawPairCov::new(&ma, &mb, prior_cov);
        Ok(PairPrediction {
            mean: [ma.mean, mb.mean],
            cov: [
                [clamp_variance(raw.var_a), raw.cov],
                [raw.cov, clamp_variance(raw.var_b)],
            ],
        })
    }

    /// Index of `x` in the point table, if present within [`DEDUP_TOLERANCE`].
    pub fn find_point(&self, x: &FeatureVector) -> Option<usize> {
        find_point(&self.points, x)
    }

    /// Add a datum over existing table indices and refit from scratch.
    pub fn update(&self, datum: PreferenceDatum) -> Result<GpPosterior> {
        let mut data = self.data.clone();
        data.push(datum);
        fit(self.points.clone(), data, self.kernel.clone(), self.sigma)
    }

    /// Add a raw comparison, deduplicating both points into the table, and refit.
    pub fn update_pair(&self, a: &FeatureVector, b: &FeatureVector, response: Preference) -> Result<GpPosterior> {
        self.kernel.check_dim(a)?;
        self.kernel.check_dim(b)?;
        let mut points = self.points.clone();
        let first = insert_point(&mut points, a);
        let second = insert_point(&mut points, b);
        let datum = PreferenceDatum::new(first, second, response)?;
        let mut data = self.data.clone();
        data.push(datum);
        fit(points, data, self.kernel.clone(), self.sigma)
    }
}

/// Per-point quantities shared by single and pairwise predictions.
pub(crate) struct PointMoments {
    pub mean: f64,
    pub prior_var: f64,
    /// `kᵀ (I + W K)⁻¹ W k`
    pub var_reduction: f64,
    pub k: DVector<f64>,
    /// `((I + W K)⁻¹ W)ᵀ k`
    pub u: DVector<f64>,
}

/// Unclamped predictive (co)variances of a pair.
pub(crate) struct RawPairCov {
    pub var_a: f64,
    pub var_b: f64,
    pub cov: f64,
}

impl RawPairCov {
    pub fn new(a: &PointMoments, b: &PointMoments, prior_cov: f64) -> Self {
        // Symmetrized so that swapping a and b gives bit-identical results.
        let cross = 0.5 * (a.u.dot(&b.k) + b.u.dot(&a.k));
        Self {
            var_a: a.prior_var - a.var_reduction,
            var_b: b.prior_var - b.var_reduction,
            cov: prior_cov - cross,
        }
    }

    /// `Var(f(a)) + Var(f(b)) − 2 Cov(f(a), f(b))`; exactly zero when `a == b`.
    pub fn difference_variance(&self) -> f64 {
        (self.var_a + self.var_b - 2.0 * self.cov).max(0.0)
    }
}

fn find_point(points: &[FeatureVector], x: &FeatureVector) -> Option<usize> {
    points.iter().position(|p| {
        p.as_slice()
            .iter()
            .zip(x.as_slice())
            .all(|(u, v)| (u - v).abs() <= DEDUP_TOLERANCE)
    })
}

fn insert_point(points: &mut Vec<FeatureVector>, x: &FeatureVector) -> usize {
    find_point(points, x).unwrap_or_else(|| {
        points.push(x.clone());
        points.len() - 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelKind;

    fn fv(c: &[f64]) -> FeatureVector {
        FeatureVector::new(c.to_vec()).unwrap()
    }

    fn datum(first: usize, second: usize, first_wins: bool) -> PreferenceDatum {
        PreferenceDatum::new(first, second, Preference::from_first_preferred(first_wins)).unwrap()
    }

    #[test]
    fn log_likelihood_examples() {
        let half = 0.5f64.ln();
        assert!((log_likelihood(&[0.3, 0.3], &[datum(0, 1, true)], 1.0).unwrap() - half).abs() < 1e-15);
        // f[0] − f[1] = √2 σ  ⇒  ln Φ(1)
        let sigma = 0.7;
        let ll = log_likelihood(&[SQRT_2 * sigma, 0.0], &[datum(0, 1, true)], sigma).unwrap();
        assert!((ll - -0.172_753_779_023_449_89).abs() < 1e-14);
        let two = log_likelihood(&[0.0, 0.0, 1.0, 1.0], &[datum(0, 1, true), datum(2, 3, false)], 1.0).unwrap();
        assert!((two - 2.0 * half).abs() < 1e-15);
    }

    #[test]
    fn log_likelihood_survives_extreme_disagreement() {
        let ll = log_likelihood(&[0.0, 40.0 * SQRT_2], &[datum(0, 1, true)], 1.0).unwrap();
        assert!(ll.is_finite() && ll < -700.0);
    }

    #[test]
    fn zero_data_grad_hess() {
        let (g, w) = likelihood_grad_hess(&[0.1, 0.2, 0.3], &[], 1.0).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bad_indices_rejected() {
        assert!(log_likelihood(&[0.0], &[PreferenceDatum { first: 0, second: 3, response: Preference::First }], 1.0).is_err());
        assert!(PreferenceDatum::new(2, 2, Preference::First).is_err());
    }

    #[test]
    fn empty_data_gives_zero_mode() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 2);
        let model = fit(vec![fv(&[0.1, 0.2]), fv(&[0.9, 0.4])], vec![], kernel, 1.0).unwrap();
        assert!(model.mode().iter().all(|&x| x == 0.0));
        assert_eq!(model.newton_iterations(), 0);
    }

    #[test]
    fn prior_prediction_recovers_kernel() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 2);
        let model = GpPosterior::prior(kernel.clone(), 1.0).unwrap();
        let (a, b) = (fv(&[0.1, 0.3]), fv(&[0.8, 0.6]));
        let pred = model.predict_pair(&a, &b).unwrap();
        assert_eq!(pred.mean, [0.0, 0.0]);
        assert_eq!(pred.cov[0][0], kernel.eval(&a, &a).unwrap());
        assert_eq!(pred.cov[1][1], kernel.eval(&b, &b).unwrap());
        assert_eq!(pred.cov[0][1], kernel.eval(&a, &b).unwrap());
    }

    #[test]
    fn anchor_prediction_is_pinned() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 1);
        let pts = vec![fv(&[0.8]), fv(&[0.2]), fv(&[0.6])];
        let model = fit(pts, vec![datum(0, 1, true), datum(2, 1, true)], kernel.clone(), 1.0).unwrap();
        let pred = model.predict_pair(&kernel.anchor, &kernel.anchor).unwrap();
        assert!(pred.mean.iter().all(|m| m.abs() <= 1e-12));
        assert!(pred.cov.iter().flatten().all(|c| c.abs() <= 1e-9));
    }

    #[test]
    fn self_comparison_update_rejected() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 1);
        let model = GpPosterior::prior(kernel, 1.0).unwrap();
        let x = fv(&[0.3]);
        assert!(matches!(model.update_pair(&x, &x, Preference::First), Err(Error::InvalidQuery(_))));
        // Points equal within the dedup tolerance are the same point.
        let y = fv(&[0.3 + 1e-13]);
        assert!(model.update_pair(&x, &y, Preference::First).is_err());
    }

    #[test]
    fn update_deduplicates_points() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 1);
        let model = GpPosterior::prior(kernel, 1.0).unwrap();
        let (a, b, c) = (fv(&[0.1]), fv(&[0.9]), fv(&[0.4]));
        let m1 = model.update_pair(&a, &b, Preference::First).unwrap();
        let m2 = m1.update_pair(&b, &c, Preference::Second).unwrap();
        assert_eq!(m2.points().len(), 3);
        assert_eq!(m2.data()[1], PreferenceDatum { first: 1, second: 2, response: Preference::Second });
        // Non-destructive.
        assert_eq!(m1.data().len(), 1);
        assert_eq!(model.data().len(), 0);
    }

    #[test]
    fn invalid_sigma_rejected() {
        let kernel = KernelConfig::default_for(KernelKind::AnchoredRbf, 1);
        assert!(GpPosterior::prior(kernel.clone(), 0.0).is_err());
        assert!(GpPosterior::prior(kernel, f64::NAN).is_err());
    }
}
