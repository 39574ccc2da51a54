//! Information-gain query selection.
//!
//! For a candidate comparison `(a, b)` with posterior means `μ₁, μ₂` and
//! difference variance `g = Var f(a) + Var f(b) − 2 Cov(f(a), f(b))`, the
//! objective is
//!
//! ```text
//! h(Φ((μ₁ − μ₂) / √(2σ² + g)))  −  √(π ln2 σ²) exp(−(μ₁ − μ₂)² / (π ln2 σ² + 2g)) / √(π ln2 σ² + 2g)
//! ```
//!
//! i.e. the entropy of the predicted answer minus a closed-form approximation
//! of the expected entropy of the answer given the true reward. Both terms are
//! in bits. A comparison of a trajectory with itself scores exactly zero, the
//! global minimum.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gp_pref::{GpPosterior, PointMoments, RawPairCov};
use crate::kernel::FeatureVector;
use crate::probit::{entropy_of_cdf_bits, PI_LN_2};

pub const DEFAULT_PAIR_BUDGET: usize = 50_000;

/// Finite set of trajectories a query may be drawn from.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    features: Vec<FeatureVector>,
    /// Raw trajectory parameters per candidate, for rendering.
    provenance: Option<Vec<Vec<f64>>>,
}

impl CandidatePool {
    pub fn new(features: Vec<FeatureVector>) -> Result<Self> {
        if let Some(first) = features.first() {
            let d = first.dim();
            if let Some(bad) = features.iter().find(|f| f.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
            }
        }
        Ok(Self { features, provenance: None })
    }

    pub fn with_provenance(mut self, params: Vec<Vec<f64>>) -> Result<Self> {
        if params.len() != self.features.len() {
            return Err(Error::InvalidInput(format!(
                "{} provenance rows for {} candidates",
                params.len(),
                self.features.len()
            )));
        }
        self.provenance = Some(params);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn get(&self, i: usize) -> &FeatureVector {
        &self.features[i]
    }

    pub fn provenance(&self, i: usize) -> Option<&[f64]> {
        self.provenance.as_ref().map(|p| p[i].as_slice())
    }

    fn require_pairs(&self) -> Result<()> {
        if self.features.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a query needs at least 2 candidates, pool has {}",
                self.features.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub mu1: f64,
    pub mu2: f64,
    /// Posterior variance of `f(a) − f(b)`, clamped at zero.
    pub g: f64,
}

/// Selected comparison: pool indices `i < j` and the objective in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryChoice {
    pub i: usize,
    pub j: usize,
    pub objective: f64,
    pub stats: PairStats,
}

fn stats_from_moments(model: &GpPosterior, a: &FeatureVector, b: &FeatureVector, ma: &PointMoments, mb: &PointMoments) -> PairStats {
    let prior_cov = model.kernel().eval_slices(a.as_slice(), b.as_slice());
    let raw = RawPairCov::new(ma, mb, prior_cov);
    PairStats {
        mu1: ma.mean,
        mu2: mb.mean,
        g: raw.difference_variance(),
    }
}

pub fn pair_stats(model: &GpPosterior, a: &FeatureVector, b: &FeatureVector) -> Result<PairStats> {
    model.kernel().check_dim(a)?;
    model.kernel().check_dim(b)?;
    let ma = model.point_moments(a);
    let mb = model.point_moments(b);
    Ok(stats_from_moments(model, a, b, &ma, &mb))
}

/// Entropy (bits) of the predicted answer, `h(Φ((μ₁ − μ₂)/√(2σ² + g)))`.
pub fn first_entropy(mu1: f64, mu2: f64, g: f64, sigma: f64) -> f64 {
    entropy_of_cdf_bits((mu1 - mu2) / (2.0 * sigma * sigma + g).sqrt())
}

/// Closed-form expected conditional entropy `m` (bits).
pub fn expected_cond_entropy(mu1: f64, mu2: f64, g: f64, sigma: f64) -> f64 {
    let base = PI_LN_2 * sigma * sigma;
    let spread = base + 2.0 * g;
    let diff = mu1 - mu2;
    base.sqrt() * (-(diff * diff) / spread).exp() / spread.sqrt()
}

pub fn objective_from_stats(stats: &PairStats, sigma: f64) -> f64 {
    first_entropy(stats.mu1, stats.mu2, stats.g, sigma) - expected_cond_entropy(stats.mu1, stats.mu2, stats.g, sigma)
}

/// Information gain (bits) of asking the user to compare `a` with `b`.
pub fn info_gain(model: &GpPosterior, a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    let stats = pair_stats(model, a, b)?;
    Ok(objective_from_stats(&stats, model.sigma()))
}

/// Per-candidate predictive quantities against one fitted model, so that each
/// pair costs O(n) instead of O(n²).
pub struct PoolCache<'a> {
    model: &'a GpPosterior,
    pool: &'a CandidatePool,
    moments: Vec<PointMoments>,
}

impl<'a> PoolCache<'a> {
    pub fn new(model: &'a GpPosterior, pool: &'a CandidatePool) -> Result<Self> {
        for f in pool.features() {
            model.kernel().check_dim(f)?;
        }
        let moments = pool.features().par_iter().map(|f| model.point_moments(f)).collect();
        Ok(Self { model, pool, moments })
    }

    pub fn stats(&self, i: usize, j: usize) -> PairStats {
        stats_from_moments(
            self.model,
            self.pool.get(i),
            self.pool.get(j),
            &self.moments[i],
            &self.moments[j],
        )
    }

    pub fn choice(&self, i: usize, j: usize) -> QueryChoice {
        let stats = self.stats(i, j);
        QueryChoice {
            i,
            j,
            objective: objective_from_stats(&stats, self.model.sigma()),
            stats,
        }
    }
}

/// Higher objective wins; ties go to the lexicographically smallest `(i, j)`.
fn better(a: QueryChoice, b: QueryChoice) -> QueryChoice {
    match a.objective.partial_cmp(&b.objective) {
        Some(Ordering::Greater) => a,
        Some(Ordering::Less) => b,
        _ => {
            if (a.i, a.j) <= (b.i, b.j) {
                a
            } else {
                b
            }
        }
    }
}

/// Map a linear index over the strict upper triangle of an `m × m` matrix to `(i, j)`.
fn unrank_pair(k: usize, m: usize) -> (usize, usize) {
    // Row i starts at offset i*m − i(i+1)/2.
    let start = |i: usize| i * m - i * (i + 1) / 2;
    let (mut lo, mut hi) = (0, m - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if start(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = lo;
    (i, i + 1 + (k - start(i)))
}

/// Candidate pairs to score: all of them, or a uniform subsample of `pair_budget`.
pub fn candidate_pairs<R: Rng + ?Sized>(m: usize, pair_budget: Option<usize>, rng: &mut R) -> Vec<(usize, usize)> {
    let total = m * (m - 1) / 2;
    match pair_budget {
        Some(budget) if total > budget => {
            let mut ks = sample(rng, total, budget).into_vec();
            ks.sort_unstable();
            ks.into_iter().map(|k| unrank_pair(k, m)).collect()
        }
        _ => (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect(),
    }
}

/// Most informative comparison in the pool under the current posterior.
///
/// The generator is only consumed when the pool has more pairs than `pair_budget`.
pub fn select_query<R: Rng + ?Sized>(
    model: &GpPosterior,
    pool: &CandidatePool,
    pair_budget: Option<usize>,
    rng: &mut R,
) -> Result<QueryChoice> {
    pool.require_pairs()?;
    let pairs = candidate_pairs(pool.len(), pair_budget, rng);
    let cache = PoolCache::new(model, pool)?;
    pairs
        .par_iter()
        .map(|&(i, j)| cache.choice(i, j))
        .reduce_with(better)
        .ok_or_else(|| Error::InvalidInput("no candidate pairs to evaluate".into()))
}

/// Uniformly random pair of distinct candidates; the objective is filled in for logging.
pub fn select_random_query<R: Rng + ?Sized>(model: &GpPosterior, pool: &CandidatePool, rng: &mut R) -> Result<QueryChoice> {
    pool.require_pairs()?;
    let m = pool.len();
    let a = rng.random_range(0..m);
    let mut b = rng.random_range(0..m - 1);
    if b >= a {
        b += 1;
    }
    let (i, j) = (a.min(b), a.max(b));
    let stats = pair_stats(model, pool.get(i), pool.get(j))?;
    Ok(QueryChoice {
        i,
        j,
        objective: objective_from_stats(&stats, model.sigma()),
        stats,
    })
}
