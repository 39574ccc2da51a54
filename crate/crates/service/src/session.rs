//! One elicitation session: a seeded candidate pool, the current posterior,
//! at most one pending query and the ordered answer history.
//!
//! Everything random is derived from the session seed, so a session rebuilt
//! from its config and history is identical to the one that wrote them,
//! including the query it would ask next.

use prefgp::acquisition::QueryChoice;
use prefgp::experiment::stream_rng;
use prefgp::sim_env::generate_pool;
use prefgp::{
    select_query, CandidatePool, Environment, EnvironmentKind, FeatureVector, GpPosterior, KernelConfig, Preference,
    TrajectoryPool,
};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// Generator stream for the candidate pool.
pub const POOL_STREAM: u64 = 2;
/// Query `k` (0-based) is selected with stream `SELECTION_STREAM_BASE + k`.
pub const SELECTION_STREAM_BASE: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub env: EnvironmentKind,
    pub seed: u64,
    pub pool_size: usize,
    pub sigma: f64,
    pub theta: f64,
    /// Defaults to the center of the normalized feature box.
    pub anchor: Option<Vec<f64>>,
    pub budget: usize,
    pub pair_budget: Option<usize>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            env: EnvironmentKind::Minigolf2d,
            seed: 0,
            pool_size: 200,
            sigma: prefgp::gp_pref::DEFAULT_SIGMA,
            theta: prefgp::kernel::DEFAULT_THETA,
            anchor: None,
            budget: 15,
            pair_budget: Some(prefgp::acquisition::DEFAULT_PAIR_BUDGET),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: String| Err(ServiceError::InvalidConfig(m));
        if self.pool_size < 2 {
            return bad(format!("pool_size must be at least 2, got {}", self.pool_size));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if self.pair_budget == Some(0) {
            return bad("pair_budget must be positive".into());
        }
        let d = Environment::new(self.env).feature_dim();
        if let Some(a) = &self.anchor {
            if a.len() != d {
                return bad(format!("anchor has {} coordinates, {} expects {d}", a.len(), self.env));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<KernelConfig, ServiceError> {
        let d = Environment::new(self.env).feature_dim();
        let anchor = match &self.anchor {
            Some(a) => FeatureVector::new(a.clone())?,
            None => FeatureVector::splat(d, 0.5),
        };
        Ok(KernelConfig::anchored_rbf(self.theta, anchor)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    First,
    Second,
}

impl From<Choice> for Preference {
    fn from(c: Choice) -> Self {
        match c {
            Choice::First => Preference::First,
            Choice::Second => Preference::Second,
        }
    }
}

impl From<Preference> for Choice {
    fn from(p: Preference) -> Self {
        match p {
            Preference::First => Choice::First,
            Preference::Second => Choice::Second,
        }
    }
}

/// One accepted answer, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub first: usize,
    pub second: usize,
    pub choice: Choice,
    pub objective: f64,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingQuery,
    Pending,
    Complete,
}

/// Posterior mean and standard deviation on a `grid × grid` lattice over the
/// normalized 2-d feature box. Row `r`, column `c` is the point
/// `(c / (grid − 1), r / (grid − 1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub grid: usize,
    pub axes: Vec<Axis>,
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    /// Raw-unit values at normalized 0 and 1.
    pub raw_min: f64,
    pub raw_max: f64,
}

pub fn selection_rng(seed: u64, asked: usize) -> ChaCha8Rng {
    stream_rng(seed, SELECTION_STREAM_BASE + asked as u64)
}

pub fn session_pool(config: &SessionConfig) -> Result<TrajectoryPool, ServiceError> {
    let env = Environment::new(config.env);
    Ok(generate_pool(&env, config.pool_size, &mut stream_rng(config.seed, POOL_STREAM))?)
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    config: SessionConfig,
    pool: TrajectoryPool,
    candidates: CandidatePool,
    model: GpPosterior,
    pending: Option<QueryChoice>,
    history: Vec<HistoryEntry>,
}

impl Session {
    pub fn create(id: String, config: SessionConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let pool = session_pool(&config)?;
        let candidates = pool.candidate_pool();
        let model = GpPosterior::prior(config.kernel()?, config.sigma)?;
        Ok(Self { id, config, pool, candidates, model, pending: None, history: Vec::new() })
    }

    /// Rebuild a session by re-applying every recorded answer in order.
    pub fn replay(id: String, config: SessionConfig, history: Vec<HistoryEntry>) -> Result<Self, ServiceError> {
        let mut session = Self::create(id, config)?;
        if history.len() > session.config.budget {
            return Err(ServiceError::Corrupt(format!(
                "history has {} answers but the budget is {}",
                history.len(),
                session.config.budget
            )));
        }
        for entry in history {
            let m = session.candidates.len();
            if entry.first >= m || entry.second >= m || entry.first == entry.second {
                return Err(ServiceError::Corrupt(format!("bad pair ({}, {}) in history", entry.first, entry.second)));
            }
            session.model = session.refit(entry.first, entry.second, entry.choice)?;
            session.history.push(entry);
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn pool(&self) -> &TrajectoryPool {
        &self.pool
    }

    pub fn model(&self) -> &GpPosterior {
        &self.model
    }

    pub fn pending(&self) -> Option<&QueryChoice> {
        self.pending.as_ref()
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn asked(&self) -> usize {
        self.history.len()
    }

    pub fn is_complete(&self) -> bool {
        self.history.len() >= self.config.budget
    }

    pub fn status(&self) -> Status {
        if self.is_complete() {
            Status::Complete
        } else if self.pending.is_some() {
            Status::Pending
        } else {
            Status::AwaitingQuery
        }
    }

    /// The pending query, selecting one first if none is pending.
    /// `None` once the budget is used up.
    pub fn next_query(&mut self) -> Result<Option<QueryChoice>, ServiceError> {
        if self.is_complete() {
            return Ok(None);
        }
        if let Some(p) = self.pending {
            return Ok(Some(p));
        }
        let mut rng = selection_rng(self.config.seed, self.asked());
        let choice = select_query(&self.model, &self.candidates, self.config.pair_budget, &mut rng)?;
        self.pending = Some(choice);
        Ok(Some(choice))
    }

    /// The history entry an answer to the pending query would append,
    /// together with the refitted model. Leaves the session untouched.
    pub fn prepare_answer(&self, choice: Choice, timestamp_ms: u64) -> Result<(HistoryEntry, GpPosterior), ServiceError> {
        let pending = self.pending.ok_or(ServiceError::NoPendingQuery)?;
        let model = self.refit(pending.i, pending.j, choice)?;
        let entry = HistoryEntry {
            first: pending.i,
            second: pending.j,
            choice,
            objective: pending.objective,
            timestamp_ms,
        };
        Ok((entry, model))
    }

    /// Commit an answer produced by [`Session::prepare_answer`].
    pub fn commit_answer(&mut self, entry: HistoryEntry, model: GpPosterior) {
        self.history.push(entry);
        self.model = model;
        self.pending = None;
    }

    pub fn submit(&mut self, choice: Choice, timestamp_ms: u64) -> Result<&HistoryEntry, ServiceError> {
        let (entry, model) = self.prepare_answer(choice, timestamp_ms)?;
        self.commit_answer(entry, model);
        Ok(self.history.last().expect("just pushed"))
    }

    fn refit(&self, i: usize, j: usize, choice: Choice) -> Result<GpPosterior, ServiceError> {
        Ok(self.model.update_pair(self.candidates.get(i), self.candidates.get(j), choice.into())?)
    }

    pub fn surface(&self, grid: usize) -> Result<Surface, ServiceError> {
        let env = self.pool.environment();
        if env.feature_dim() != 2 {
            return Err(ServiceError::Unsupported(format!(
                "reward surface needs a 2-d feature space; {} has {}",
                env.kind(),
                env.feature_dim()
            )));
        }
        if grid < 2 {
            return Err(ServiceError::InvalidGrid(grid));
        }
        let step = 1.0 / (grid - 1) as f64;
        let mut mean = vec![vec![0.0; grid]; grid];
        let mut std = vec![vec![0.0; grid]; grid];
        for r in 0..grid {
            for c in 0..grid {
                let x = FeatureVector::new(vec![c as f64 * step, r as f64 * step])?;
                let (m, v) = self.model.predict_point(&x)?;
                mean[r][c] = m;
                std[r][c] = v.sqrt();
            }
        }
        let norm = self.pool.normalizer();
        let axes = env
            .feature_names()
            .iter()
            .enumerate()
            .map(|(k, name)| Axis { name: name.to_string(), raw_min: norm.lo[k], raw_max: norm.hi[k] })
            .collect();
        Ok(Surface { grid, axes, mean, std })
    }
}
