//! Synthetic environments, simulated users and diverse test-set sampling.
//!
//! The environments are closed-form surrogates: each maps a box of action
//! parameters to a handful of trajectory features. No dynamics are simulated.
//!
//! * `minigolf2d`: params (angle rad ∈ [−π/4, π/4], speed m/s ∈ [0.5, 3]);
//!   features are the params themselves. Shots render as straight lines of
//!   length `speed × 1 m` from the tee.
//! * `tosser2d`: params (hit speed m/s ∈ [0, 6], launch angle rad ∈ [0.1, 1.4],
//!   contact offset ∈ [−1, 1]). Contact quality `c = exp(−offset² / 0.08)`
//!   scales the launch speed `u = c·speed`. Features are the horizontal range
//!   `u² sin 2α / g` and the number of capsule flips `10 u² (1 − sin α) sin α / (π g)`.
//!   Most random hits miss the capsule and land near the origin of feature space.
//! * `driver4d`: params (accel ∈ [−1, 1], steer rad ∈ [−0.3, 0.3], initial
//!   speed ∈ [0.6, 1.2], initial lateral offset ∈ [−0.08, 0.08]) over a unit
//!   horizon. With `v = v₀ + accel/2`, `v̄ = (v₀ + v)/2`, heading `h = 2·steer·v̄`,
//!   final position `x = v̄ cos(h/2)`, `y = y₀ + v̄ sin(h/2)`; features are the
//!   distance to the other car (which cuts in to `(0.9, 0)`), speed `v`,
//!   heading `h`, and distance from `y` to the nearest lane center
//!   (`−0.17, 0, 0.17`).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::acquisition::CandidatePool;
use crate::error::{Error, Result};
use crate::gp_pref::Preference;
use crate::kernel::FeatureVector;

const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Minigolf2d,
    Driver4d,
    Tosser2d,
}

impl EnvironmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvironmentKind::Minigolf2d => "minigolf2d",
            EnvironmentKind::Driver4d => "driver4d",
            EnvironmentKind::Tosser2d => "tosser2d",
        }
    }
}

impl std::str::FromStr for EnvironmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minigolf2d" => Ok(EnvironmentKind::Minigolf2d),
            "driver4d" => Ok(EnvironmentKind::Driver4d),
            "tosser2d" => Ok(EnvironmentKind::Tosser2d),
            other => Err(Error::UnknownEnvironment(other.to_string())),
        }
    }
}

impl std::fmt::Display for EnvironmentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameter box and feature map of one environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Environment {
    kind: EnvironmentKind,
}

pub fn make_environment(name: &str) -> Result<Environment> {
    Ok(Environment::new(name.parse()?))
}

impl Environment {
    pub fn new(kind: EnvironmentKind) -> Self {
        Self { kind }
    }

    pub fn kind(&self) -> EnvironmentKind {
        self.kind
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self.kind {
            EnvironmentKind::Minigolf2d => &["angle", "speed"],
            EnvironmentKind::Driver4d => &["accel", "steer", "initial_speed", "initial_offset"],
            EnvironmentKind::Tosser2d => &["hit_speed", "launch_angle", "contact_offset"],
        }
    }

    pub fn param_bounds(&self) -> &'static [(f64, f64)] {
        match self.kind {
            EnvironmentKind::Minigolf2d => &[(-FRAC_PI_4, FRAC_PI_4), (0.5, 3.0)],
            EnvironmentKind::Driver4d => &[(-1.0, 1.0), (-0.3, 0.3), (0.6, 1.2), (-0.08, 0.08)],
            EnvironmentKind::Tosser2d => &[(0.0, 6.0), (0.1, 1.4), (-1.0, 1.0)],
        }
    }

    pub fn feature_names(&self) -> &'static [&'static str] {
        match self.kind {
            EnvironmentKind::Minigolf2d => &["angle", "speed"],
            EnvironmentKind::Driver4d => &["distance_to_other_car", "speed", "heading", "lane_center_distance"],
            EnvironmentKind::Tosser2d => &["horizontal_range", "capsule_flips"],
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_names().len()
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.param_bounds()
            .iter()
            .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    /// Raw (unnormalized) features of a parameter vector.
    pub fn raw_features(&self, params: &[f64]) -> Result<Vec<f64>> {
        let bounds = self.param_bounds();
        if params.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                got: params.len(),
            });
        }
        for (name, (&p, &(lo, hi))) in self.param_names().iter().zip(params.iter().zip(bounds)) {
            if !(lo..=hi).contains(&p) {
                return Err(Error::InvalidInput(format!("{name} = {p} outside [{lo}, {hi}]")));
            }
        }
        Ok(match self.kind {
            EnvironmentKind::Minigolf2d => params.to_vec(),
            EnvironmentKind::Tosser2d => tosser_features(params[0], params[1], params[2]).to_vec(),
            EnvironmentKind::Driver4d => driver_features(params[0], params[1], params[2], params[3]).to_vec(),
        })
    }
}

fn tosser_features(speed: f64, angle: f64, offset: f64) -> [f64; 2] {
    let contact = (-offset * offset / 0.08).exp();
    let u = contact * speed;
    let range = u * u * (2.0 * angle).sin() / GRAVITY;
    let flips = 10.0 * u * u * (1.0 - angle.sin()) * angle.sin() / (PI * GRAVITY);
    [range, flips]
}

fn driver_features(accel: f64, steer: f64, v0: f64, y0: f64) -> [f64; 4] {
    const LANES: [f64; 3] = [-0.17, 0.0, 0.17];
    const OTHER_CAR_END: (f64, f64) = (0.9, 0.0);
    let speed = v0 + 0.5 * accel;
    let mean_speed = 0.5 * (v0 + speed);
    let heading = 2.0 * steer * mean_speed;
    let x = mean_speed * (0.5 * heading).cos();
    let y = y0 + mean_speed * (0.5 * heading).sin();
    let other = ((x - OTHER_CAR_END.0).powi(2) + (y - OTHER_CAR_END.1).powi(2)).sqrt();
    let lane = LANES.iter().map(|c| (y - c).abs()).fold(f64::INFINITY, f64::min);
    [other, speed, heading, lane]
}

/// Straight-line minigolf shot from the tee: `[start, landing]` in table coordinates (m).
pub fn minigolf_shot_path(angle: f64, speed: f64) -> [[f64; 2]; 2] {
    let length = speed;
    [[0.0, 0.0], [length * angle.sin(), length * angle.cos()]]
}

/// Per-axis min-max map onto `[0, 1]`, fitted once per session and then frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNormalizer {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl FeatureNormalizer {
    pub fn fit(raw: &[Vec<f64>]) -> Result<Self> {
        let first = raw
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot fit a normalizer to zero rows".into()))?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for row in raw {
            if row.len() != lo.len() {
                return Err(Error::DimensionMismatch { expected: lo.len(), got: row.len() });
            }
            for (k, &v) in row.iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Ok(Self { lo, hi })
    }

    /// Normalize, clamping into the unit box. Constant axes map to 0.5.
    pub fn apply(&self, raw: &[f64]) -> Result<FeatureVector> {
        if raw.len() != self.lo.len() {
            return Err(Error::DimensionMismatch { expected: self.lo.len(), got: raw.len() });
        }
        let coords = raw
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect();
        FeatureVector::new(coords)
    }

    pub fn invert(&self, normalized: &[f64]) -> Vec<f64> {
        normalized
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| lo + v * (hi - lo))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStub {
    pub params: Vec<f64>,
    pub raw_features: Vec<f64>,
    pub features: FeatureVector,
}

/// Trajectories drawn from one environment plus the normalization fitted on them.
#[derive(Debug, Clone)]
pub struct TrajectoryPool {
    env: Environment,
    trajectories: Vec<TrajectoryStub>,
    normalizer: FeatureNormalizer,
}

/// `m` trajectories with uniformly random parameters; normalization is fitted on this pool.
pub fn generate_pool<R: Rng + ?Sized>(env: &Environment, m: usize, rng: &mut R) -> Result<TrajectoryPool> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("pool size must be at least 2, got {m}")));
    }
    let params: Vec<Vec<f64>> = (0..m).map(|_| env.sample_params(rng)).collect();
    TrajectoryPool::from_params(env, params, None)
}

impl TrajectoryPool {
    /// Build a pool from parameter rows. Without a normalizer one is fitted on the rows.
    pub fn from_params(env: &Environment, params: Vec<Vec<f64>>, normalizer: Option<FeatureNormalizer>) -> Result<Self> {
        let raw: Vec<Vec<f64>> = params.iter().map(|p| env.raw_features(p)).collect::<Result<_>>()?;
        let normalizer = match normalizer {
            Some(n) => n,
            None => FeatureNormalizer::fit(&raw)?,
        };
        let trajectories = params
            .into_iter()
            .zip(raw)
            .map(|(params, raw_features)| {
                let features = normalizer.apply(&raw_features)?;
                Ok(TrajectoryStub { params, raw_features, features })
            })
            .collect::<Result<_>>()?;
        Ok(Self { env: *env, trajectories, normalizer })
    }

    /// Fresh draws from the same environment, normalized with this pool's frozen map.
    pub fn draw_more<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<TrajectoryPool> {
        let params = (0..m).map(|_| self.env.sample_params(rng)).collect();
        TrajectoryPool::from_params(&self.env, params, Some(self.normalizer.clone()))
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn trajectories(&self) -> &[TrajectoryStub] {
        &self.trajectories
    }

    pub fn normalizer(&self) -> &FeatureNormalizer {
        &self.normalizer
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.trajectories.iter().map(|t| t.features.clone()).collect()
    }

    pub fn candidate_pool(&self) -> CandidatePool {
        CandidatePool::new(self.features())
            .and_then(|p| p.with_provenance(self.trajectories.iter().map(|t| t.params.clone()).collect()))
            .expect("pool rows share one dimension")
    }

    /// Delimited export: an `# environment:` line, then a header of param,
    /// raw-feature and normalized-feature columns, one row per trajectory.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# environment: {}", self.env.kind())?;
        let mut header: Vec<String> = self.env.param_names().iter().map(|n| format!("param_{n}")).collect();
        header.extend(self.env.feature_names().iter().map(|n| format!("raw_{n}")));
        header.extend(self.env.feature_names().iter().map(|n| format!("norm_{n}")));
        writeln!(out, "{}", header.join(","))?;
        for t in &self.trajectories {
            let mut line = String::new();
            for v in t.params.iter().chain(&t.raw_features).chain(t.features.as_slice()) {
                if !line.is_empty() {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Inverse of [`TrajectoryPool::write_csv`]. The normalizer is refitted on
    /// the raw columns, which reproduces the exporting pool's map exactly.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let env_line = lines.next().ok_or_else(|| Error::Parse("empty pool file".into()))??;
        let env: Environment = make_environment(
            env_line
                .strip_prefix("# environment:")
                .ok_or_else(|| Error::Parse("missing `# environment:` line".into()))?
                .trim(),
        )?;
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
        let n_params = env.param_names().len();
        let width = n_params + 2 * env.feature_dim();
        if header.split(',').count() != width {
            return Err(Error::Parse(format!("expected {width} columns in header `{header}`")));
        }
        let mut params = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 1)))?;
            if row.len() != width {
                return Err(Error::Parse(format!("row {} has {} columns, expected {width}", lineno + 1, row.len())));
            }
            params.push(row[..n_params].to_vec());
        }
        TrajectoryPool::from_params(&env, params, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Linear,
    Poly2,
}

/// Ground-truth reward of a simulated user.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueReward {
    kind: RewardKind,
    dim: usize,
    /// Linear: one weight per feature. Poly2: constant, linear terms, then
    /// `ψᵢψⱼ` for `i ≤ j` in row-major order.
    weights: Vec<f64>,
    sigma: f64,
}

pub fn poly2_len(dim: usize) -> usize {
    1 + dim + dim * (dim + 1) / 2
}

impl TrueReward {
    pub fn new(kind: RewardKind, dim: usize, weights: Vec<f64>, sigma: f64) -> Result<Self> {
        let expected = match kind {
            RewardKind::Linear => dim,
            RewardKind::Poly2 => poly2_len(dim),
        };
        if weights.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: weights.len() });
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { kind, dim, weights, sigma })
    }

    /// Weights drawn i.i.d. from the standard normal.
    pub fn sample<R: Rng + ?Sized>(kind: RewardKind, dim: usize, sigma: f64, rng: &mut R) -> Result<Self> {
        let len = match kind {
            RewardKind::Linear => dim,
            RewardKind::Poly2 => poly2_len(dim),
        };
        let weights = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Self::new(kind, dim, weights, sigma)
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn negated(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| -w).collect(),
            ..self.clone()
        }
    }

    pub fn evaluate(&self, psi: &FeatureVector) -> f64 {
        let x = psi.as_slice();
        debug_assert_eq!(x.len(), self.dim);
        match self.kind {
            RewardKind::Linear => self.weights.iter().zip(x).map(|(w, v)| w * v).sum(),
            RewardKind::Poly2 => {
                let d = self.dim;
                let mut value = self.weights[0];
                for (w, v) in self.weights[1..=d].iter().zip(x) {
                    value += w * v;
                }
                let mut k = 1 + d;
                for i in 0..d {
                    for j in i..d {
                        value += self.weights[k] * x[i] * x[j];
                        k += 1;
                    }
                }
                value
            }
        }
    }
}

/// Noisy simulated answer: `a` wins iff `R(a) − R(b) > v` with `v ~ N(0, 2σ²)`.
pub fn oracle_respond<R: Rng + ?Sized>(reward: &TrueReward, a: &FeatureVector, b: &FeatureVector, rng: &mut R) -> Preference {
    let noise = SQRT_2 * reward.sigma * rng.sample::<f64, _>(StandardNormal);
    Preference::from_first_preferred(reward.evaluate(a) - reward.evaluate(b) > noise)
}

/// Noiseless answer `[R(a) > R(b)]`; exact ties go to `a`.
pub fn noiseless_respond(reward: &TrueReward, a: &FeatureVector, b: &FeatureVector) -> Preference {
    let (ra, rb) = (reward.evaluate(a), reward.evaluate(b));
    if ra == rb {
        log::warn!("tied true rewards ({ra}); answering `first`");
        return Preference::First;
    }
    Preference::from_first_preferred(ra > rb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Minimum L2 distance between accepted points, in normalized feature space.
    pub radius: f64,
    /// Visit at most this many candidates; `None` visits the whole pool.
    pub max_attempts: Option<usize>,
}

impl SamplerConfig {
    pub fn new(radius: f64) -> Self {
        Self { radius, max_attempts: None }
    }
}

/// Dart throwing over a finite set: visit the points in random order and keep
/// each one that is at least `radius` from everything kept so far. Returns
/// indices into `points` in acceptance order.
pub fn poisson_disk_sample<R: Rng + ?Sized>(points: &[FeatureVector], cfg: &SamplerConfig, rng: &mut R) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    poisson_disk_in_order(points, cfg, &order)
}

/// [`poisson_disk_sample`] with an explicit visitation order.
pub fn poisson_disk_in_order(points: &[FeatureVector], cfg: &SamplerConfig, order: &[usize]) -> Result<Vec<usize>> {
    if cfg.radius.is_nan() || cfg.radius < 0.0 {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {}", cfg.radius)));
    }
    let r2 = cfg.radius * cfg.radius;
    let limit = cfg.max_attempts.unwrap_or(order.len()).min(order.len());
    let mut accepted: Vec<usize> = Vec::new();
    for &idx in &order[..limit] {
        let p = &points[idx];
        if accepted.iter().all(|&a| points[a].squared_distance(p) >= r2) {
            accepted.push(idx);
        }
    }
    Ok(accepted)
}

/// Radius whose accepted set under `order` is closest to `target` points (bisection).
pub fn radius_for_target(points: &[FeatureVector], target: usize, order: &[usize]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points to sample from".into()));
    }
    let count = |r: f64| poisson_disk_in_order(points, &SamplerConfig::new(r), order).map(|s| s.len());
    let d = points[0].dim() as f64;
    let (mut lo, mut hi) = (0.0, d.sqrt() + 1e-9);
    let mut best = (usize::MAX, hi);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let n = count(mid)?;
        let miss = n.abs_diff(target);
        if miss < best.0 || (miss == best.0 && mid > best.1) {
            best = (miss, mid);
        }
        if n == target {
            break;
        }
        if n > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fv(c: &[f64]) -> FeatureVector {
        FeatureVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn unknown_environment() {
        assert!(matches!(make_environment("pinball"), Err(Error::UnknownEnvironment(_))));
    }

    #[test]
    fn minigolf_features_are_the_params() {
        let env = make_environment("minigolf2d").unwrap();
        assert_eq!(env.raw_features(&[0.3, 2.0]).unwrap(), vec![0.3, 2.0]);
        let pool = TrajectoryPool::from_params(&env, vec![vec![-0.5, 1.0], vec![0.3, 2.0], vec![0.7, 3.0]], None).unwrap();
        let f = &pool.trajectories()[1].features;
        assert!((f[0] - 0.8 / 1.2).abs() < 1e-15);
        assert!((f[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tosser_zero_speed_has_zero_range() {
        let env = make_environment("tosser2d").unwrap();
        let f = env.raw_features(&[0.0, 0.7, 0.0]).unwrap();
        assert_eq!(f, vec![0.0, 0.0]);
        assert!(env.raw_features(&[7.0, 0.7, 0.0]).is_err());
    }

    #[test]
    fn pool_is_seeded_and_normalized() {
        for kind in [EnvironmentKind::Minigolf2d, EnvironmentKind::Driver4d, EnvironmentKind::Tosser2d] {
            let env = Environment::new(kind);
            let a = generate_pool(&env, 1000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = generate_pool(&env, 1000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a.trajectories(), b.trajectories());
            for t in a.trajectories() {
                assert_eq!(t.features.dim(), env.feature_dim());
                assert!(t.features.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
                assert!(t.params.iter().zip(env.param_bounds()).all(|(p, (lo, hi))| (lo..=hi).contains(&p)));
            }
        }
        let env = Environment::new(EnvironmentKind::Tosser2d);
        assert_eq!(generate_pool(&env, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap().len(), 2);
        assert!(generate_pool(&env, 1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn renormalizing_is_a_no_op() {
        let env = Environment::new(EnvironmentKind::Driver4d);
        let pool = generate_pool(&env, 200, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let normalized: Vec<Vec<f64>> = pool.features().into_iter().map(|f| f.into_inner()).collect();
        let again = FeatureNormalizer::fit(&normalized).unwrap();
        for row in &normalized {
            let twice = again.apply(row).unwrap();
            for (x, y) in row.iter().zip(twice.as_slice()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reward_examples() {
        let lin = TrueReward::new(RewardKind::Linear, 3, vec![1.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(lin.evaluate(&fv(&[0.7, 0.2, 0.9])), 0.7);
        // poly2 in d = 2: [1, x0, x1, x0², x0x1, x1²]
        let quad = TrueReward::new(RewardKind::Poly2, 2, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(quad.evaluate(&fv(&[0.5, 0.0])), 0.25);
        assert!(TrueReward::new(RewardKind::Poly2, 2, vec![0.0; 5], 1.0).is_err());
    }

    #[test]
    fn noiseless_examples() {
        let r = TrueReward::new(RewardKind::Linear, 1, vec![1.0], 1.0).unwrap();
        assert_eq!(noiseless_respond(&r, &fv(&[1.0]), &fv(&[0.0])), Preference::First);
        assert_eq!(noiseless_respond(&r, &fv(&[0.0]), &fv(&[1.0])), Preference::Second);
        assert_eq!(noiseless_respond(&r, &fv(&[0.5]), &fv(&[0.5])), Preference::First);
    }

    #[test]
    fn near_noiseless_oracle_is_deterministic() {
        let r = TrueReward::new(RewardKind::Linear, 1, vec![1.0], 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            assert_eq!(oracle_respond(&r, &fv(&[0.6]), &fv(&[0.5]), &mut rng), Preference::First);
            assert_eq!(oracle_respond(&r, &fv(&[0.4]), &fv(&[0.5]), &mut rng), Preference::Second);
        }
    }

    #[test]
    fn poisson_disk_hand_example() {
        let pts = vec![fv(&[0.0, 0.0]), fv(&[0.05, 0.0]), fv(&[1.0, 1.0])];
        let kept = poisson_disk_in_order(&pts, &SamplerConfig::new(0.1), &[0, 1, 2]).unwrap();
        assert_eq!(kept, vec![0, 2]);
    }

    #[test]
    fn poisson_disk_radius_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<FeatureVector> = (0..50).map(|_| fv(&[rng.random(), rng.random()])).collect();
        assert_eq!(poisson_disk_sample(&pts, &SamplerConfig::new(2.0), &mut rng).unwrap().len(), 1);
        assert_eq!(poisson_disk_sample(&pts, &SamplerConfig::new(0.0), &mut rng).unwrap().len(), 50);
        assert!(poisson_disk_sample(&pts, &SamplerConfig::new(-1.0), &mut rng).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let env = Environment::new(EnvironmentKind::Tosser2d);
        let pool = generate_pool(&env, 25, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        let mut buf = Vec::new();
        pool.write_csv(&mut buf).unwrap();
        let back = TrajectoryPool::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.trajectories(), pool.trajectories());
        assert_eq!(back.normalizer(), pool.normalizer());
    }
}
