//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: the oracles work from the
//! defining formulas with plain loops, a derivative-free optimizer and Monte
//! Carlo sampling.

#![allow(dead_code)]

use prefgp::{FeatureVector, Preference, PreferenceDatum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fv(coords: &[f64]) -> FeatureVector {
    FeatureVector::new(coords.to_vec()).unwrap()
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<FeatureVector> {
    (0..n).map(|_| fv(&(0..d).map(|_| rng.random::<f64>()).collect::<Vec<_>>())).collect()
}

pub fn random_data<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<PreferenceDatum> {
    (0..count)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            PreferenceDatum::new(a, b, Preference::from_first_preferred(rng.random::<bool>())).unwrap()
        })
        .collect()
}

/// Φ by Simpson integration of the density; accurate to ~1e-13 for |z| ≤ 8.
pub fn phi_integral(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - phi_integral(-z);
    }
    let steps = 4000;
    let h = z / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(0.0) + pdf(z);
    for k in 1..steps {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(k as f64 * h);
    }
    0.5 + acc * h / 3.0
}

pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Anchored RBF written out from its definition.
pub fn rbf_reference(x: &[f64], y: &[f64], theta: f64, anchor: &[f64]) -> f64 {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    (-theta * sq(x, y)).exp() - (-theta * sq(x, anchor) - theta * sq(y, anchor)).exp()
}

/// Nelder–Mead minimizer with restarts.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], scale: f64, tol: f64) -> Vec<f64> {
    let n = start.len();
    let mut best = start.to_vec();
    for _restart in 0..8 {
        let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
        for i in 0..n {
            let mut p = best.clone();
            p[i] += scale;
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
        for _ in 0..20_000 {
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
            values = idx.iter().map(|&i| values[i]).collect();
            let spread = simplex
                .iter()
                .skip(1)
                .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread < tol {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };
            let reflected = along(-1.0);
            let fr = f(&reflected);
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = f(&expanded);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
            } else {
                let contracted = if fr < values[n] { along(-0.5) } else { along(0.5) };
                let fc = f(&contracted);
                if fc < values[n].min(fr) {
                    simplex[n] = contracted;
                    values[n] = fc;
                } else {
                    for i in 1..=n {
                        simplex[i] = (0..n).map(|k| 0.5 * (simplex[0][k] + simplex[i][k])).collect();
                        values[i] = f(&simplex[i]);
                    }
                }
            }
        }
        let improved = simplex[0].iter().zip(&best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        best = simplex[0].clone();
        if improved < tol {
            break;
        }
    }
    best
}

/// Monte Carlo mean and standard error of `g(Δ)` for `Δ = f₁ − f₂` drawn
/// from the bivariate normal with the given mean and covariance.
pub fn mc_pair_mean<R: Rng>(
    rng: &mut R,
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    samples: usize,
    mut g: impl FnMut(f64) -> f64,
) -> (f64, f64) {
    let l11 = cov[0][0].sqrt();
    let l21 = if l11 > 0.0 { cov[1][0] / l11 } else { 0.0 };
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let f1 = mean[0] + l11 * z1;
        let f2 = mean[1] + l21 * z1 + l22 * z2;
        let v = g(f1 - f2);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let m = sum / n;
    let var = (sum_sq / n - m * m).max(0.0);
    (m, (var / n).sqrt())
}
