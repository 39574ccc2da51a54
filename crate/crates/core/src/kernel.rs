//! Anchored covariance kernels over trajectory-feature space.
//!
//! Both kernels pin the reward at an anchor point `Ψ̄` to exactly zero with
//! zero variance. Preferences only identify rewards up to an additive
//! constant, and the anchor removes that degree of freedom.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in (normalized) trajectory-feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("feature vector must be nonempty".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    /// Constant vector, e.g. the default anchor at the center of the unit box.
    pub fn splat(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        squared_distance(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    AnchoredRbf,
    Linear,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::AnchoredRbf => "anchored_rbf",
            KernelKind::Linear => "linear",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anchored_rbf" => Ok(KernelKind::AnchoredRbf),
            "linear" => Ok(KernelKind::Linear),
            other => Err(Error::Parse(format!("unknown kernel kind `{other}`"))),
        }
    }
}

pub const DEFAULT_THETA: f64 = 1.0;
pub const DEFAULT_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Inverse squared length-scale of the RBF part. Ignored by the linear kernel.
    pub theta: f64,
    pub anchor: FeatureVector,
    /// Added to the Gram diagonal before factorization.
    pub jitter: f64,
}

impl KernelConfig {
    pub fn anchored_rbf(theta: f64, anchor: FeatureVector) -> Result<Self> {
        Self {
            kind: KernelKind::AnchoredRbf,
            theta,
            anchor,
            jitter: DEFAULT_JITTER,
        }
        .validated()
    }

    pub fn linear(anchor: FeatureVector) -> Result<Self> {
        Self {
            kind: KernelKind::Linear,
            theta: DEFAULT_THETA,
            anchor,
            jitter: DEFAULT_JITTER,
        }
        .validated()
    }

    /// Default kernel of the given kind on `[0,1]^dim`: θ = 1, anchor at the box center.
    pub fn default_for(kind: KernelKind, dim: usize) -> Self {
        Self {
            kind,
            theta: DEFAULT_THETA,
            anchor: FeatureVector::splat(dim, 0.5),
            jitter: DEFAULT_JITTER,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Result<Self> {
        self.jitter = jitter;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidInput(format!("theta must be positive, got {}", self.theta)));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::InvalidInput(format!("jitter must be nonnegative, got {}", self.jitter)));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    pub fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Kernel value `k(x, y)` without jitter.
    pub fn eval(&self, x: &FeatureVector, y: &FeatureVector) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.eval_slices(x.as_slice(), y.as_slice()))
    }

    pub(crate) fn eval_slices(&self, x: &[f64], y: &[f64]) -> f64 {
        let anchor = self.anchor.as_slice();
        match self.kind {
            KernelKind::AnchoredRbf => anchored_rbf_raw(x, y, anchor, self.theta),
            KernelKind::Linear => linear_raw(x, y, anchor),
        }
    }
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn anchored_rbf_raw(x: &[f64], y: &[f64], anchor: &[f64], theta: f64) -> f64 {
    let xy = squared_distance(x, y);
    let xa = squared_distance(x, anchor);
    let ya = squared_distance(y, anchor);
    (-theta * xy).exp() - (-theta * xa - theta * ya).exp()
}

fn linear_raw(x: &[f64], y: &[f64], anchor: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(anchor)
        .map(|((a, b), c)| (a - c) * (b - c))
        .sum()
}

fn check_same_dim(x: &FeatureVector, y: &FeatureVector) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// `exp(-θ‖x−y‖²) − exp(-θ‖x−Ψ̄‖² − θ‖y−Ψ̄‖²)`
pub fn anchored_rbf(x: &FeatureVector, y: &FeatureVector, theta: f64, anchor: &FeatureVector) -> Result<f64> {
    check_same_dim(x, anchor)?;
    check_same_dim(y, anchor)?;
    Ok(anchored_rbf_raw(x.as_slice(), y.as_slice(), anchor.as_slice(), theta))
}

/// Dot product centered at the anchor, `(x−Ψ̄)·(y−Ψ̄)`.
pub fn linear_kernel(x: &FeatureVector, y: &FeatureVector, anchor: &FeatureVector) -> Result<f64> {
    check_same_dim(x, anchor)?;
    check_same_dim(y, anchor)?;
    Ok(linear_raw(x.as_slice(), y.as_slice(), anchor.as_slice()))
}

/// Pre-jitter kernel matrix. Symmetric by construction.
pub fn kernel_matrix(points: &[FeatureVector], cfg: &KernelConfig) -> Result<DMatrix<f64>> {
    for p in points {
        cfg.check_dim(p)?;
    }
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = cfg.eval_slices(points[i].as_slice(), points[j].as_slice());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Rectangular cross-kernel matrix with entries `k(rows[i], cols[j])`.
pub fn cross_kernel(rows: &[FeatureVector], cols: &[FeatureVector], cfg: &KernelConfig) -> Result<DMatrix<f64>> {
    for p in rows.iter().chain(cols) {
        cfg.check_dim(p)?;
    }
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        cfg.eval_slices(rows[i].as_slice(), cols[j].as_slice())
    }))
}

const PIVOT_FLOOR: f64 = 1e-14;

/// Gram matrix with jitter on the diagonal, checked to be Cholesky-factorizable.
pub fn gram_matrix(points: &[FeatureVector], cfg: &KernelConfig) -> Result<DMatrix<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("gram matrix needs at least one point".into()));
    }
    let mut k = kernel_matrix(points, cfg)?;
    for i in 0..points.len() {
        k[(i, i)] += cfg.jitter;
    }
    // Pivots at rounding level mean the factorization only succeeded by luck.
    let floor = PIVOT_FLOOR * k.diagonal().amax();
    match k.clone().cholesky() {
        Some(chol) if chol.l_dirty().diagonal().iter().all(|&p| p * p > floor) => Ok(k),
        _ => Err(Error::Degenerate(describe_degeneracy(points, cfg))),
    }
}

fn describe_degeneracy(points: &[FeatureVector], cfg: &KernelConfig) -> String {
    const NEAR: f64 = 1e-6;
    let mut culprits = Vec::new();
    for i in 0..points.len() {
        if cfg.kind == KernelKind::AnchoredRbf && points[i].squared_distance(&cfg.anchor).sqrt() < NEAR {
            culprits.push(format!("point {i} coincides with the anchor"));
        }
        for j in i + 1..points.len() {
            let d = points[i].squared_distance(&points[j]).sqrt();
            if d < NEAR {
                culprits.push(format!("points {i} and {j} are (near-)duplicates (distance {d:e})"));
            }
        }
    }
    if culprits.is_empty() {
        format!(
            "gram matrix of {} points is not positive definite with jitter {:e}",
            points.len(),
            cfg.jitter
        )
    } else {
        format!("gram matrix is singular with jitter {:e}: {}", cfg.jitter, culprits.join("; "))
    }
}
