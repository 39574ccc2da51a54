//! Simulation harness: learning curves for active and random querying with GP
//! and linear reward models against a simulated user.
//!
//! Every seed owns a world (true reward, training pool, diverse test set) and
//! each method inside it draws from its own generator streams, so the query
//! choices of one method never perturb another.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::acquisition::{select_query, select_random_query, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::gp_pref::{GpPosterior, Preference, DEFAULT_SIGMA};
use crate::kernel::{FeatureVector, KernelConfig, DEFAULT_THETA};
use crate::probit::log_norm_cdf;
use crate::sim_env::{
    generate_pool, noiseless_respond, oracle_respond, poisson_disk_in_order, radius_for_target, Environment,
    EnvironmentKind, RewardKind, SamplerConfig, TrajectoryPool, TrueReward,
};
use crate::snapshot::write_snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ActiveGp,
    RandomGp,
    ActiveLinear,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ActiveGp, Method::RandomGp, Method::ActiveLinear];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ActiveGp => "active_gp",
            Method::RandomGp => "random_gp",
            Method::ActiveLinear => "active_linear",
        }
    }

    fn stream_index(self) -> u64 {
        match self {
            Method::ActiveGp => 0,
            Method::RandomGp => 1,
            Method::ActiveLinear => 2,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentKind,
    pub methods: Vec<Method>,
    pub reward: RewardKind,
    /// Probit noise scale, shared by the simulated user and the learner.
    pub sigma: f64,
    pub theta: f64,
    /// Defaults to the center of the normalized feature box.
    pub anchor: Option<Vec<f64>>,
    pub train_pool: usize,
    /// Trajectories drawn before diverse subsampling of the test set.
    pub test_pool: usize,
    /// Poisson-disk radius tuned so that about this many test points survive.
    pub test_target: Option<usize>,
    /// Fixed Poisson-disk radius; takes precedence over `test_target`.
    pub test_radius: Option<f64>,
    pub budget: usize,
    pub eval_every: usize,
    /// Cap on scored pairs per active query; `None` scores every pair.
    pub pair_budget: Option<usize>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: EnvironmentKind::Tosser2d,
            methods: Method::ALL.to_vec(),
            reward: RewardKind::Poly2,
            sigma: DEFAULT_SIGMA,
            theta: DEFAULT_THETA,
            anchor: None,
            train_pool: 500,
            test_pool: 1000,
            test_target: Some(20),
            test_radius: None,
            budget: 200,
            eval_every: 5,
            pair_budget: Some(DEFAULT_PAIR_BUDGET),
            seeds: vec![0, 1, 2, 3, 4],
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.budget < 1 {
            return fail("budget must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if self.eval_every < 1 {
            return fail("eval_every must be at least 1".into());
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 || self.theta.is_nan() || self.theta <= 0.0 {
            return fail(format!("sigma ({}) and theta ({}) must be positive", self.sigma, self.theta));
        }
        if self.train_pool < 2 || self.test_pool < 2 {
            return fail("pools need at least 2 trajectories".into());
        }
        if self.test_radius.is_none() && self.test_target.is_none() {
            return fail("set test_radius or test_target".into());
        }
        let d = Environment::new(self.environment).feature_dim();
        if let Some(anchor) = &self.anchor {
            if anchor.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: anchor.len() });
            }
        }
        Ok(())
    }

    fn anchor(&self) -> Result<FeatureVector> {
        let d = Environment::new(self.environment).feature_dim();
        match &self.anchor {
            Some(a) => FeatureVector::new(a.clone()),
            None => Ok(FeatureVector::splat(d, 0.5)),
        }
    }

    pub fn kernel_for(&self, method: Method) -> Result<KernelConfig> {
        match method {
            Method::ActiveLinear => KernelConfig::linear(self.anchor()?),
            Method::ActiveGp | Method::RandomGp => KernelConfig::anchored_rbf(self.theta, self.anchor()?),
        }
    }

    /// Queries-asked values at which the model is evaluated, always including 0 and the budget.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut points: Vec<usize> = (0..=self.budget).step_by(self.eval_every).collect();
        if points.last() != Some(&self.budget) {
            points.push(self.budget);
        }
        points
    }
}

const STREAM_TRUTH: u64 = 1;
const STREAM_TRAIN_POOL: u64 = 2;
const STREAM_TEST_SET: u64 = 3;
const STREAM_METHOD_BASE: u64 = 16;

/// Independent generator stream `stream` of seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One comparison of the test set with its noiseless answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestQuery {
    pub first: usize,
    pub second: usize,
    pub response: Preference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub points: Vec<FeatureVector>,
    pub queries: Vec<TestQuery>,
}

impl TestSet {
    /// Every unordered pair of `points`, answered without noise.
    pub fn all_pairs(truth: &TrueReward, points: Vec<FeatureVector>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "test set needs at least 2 diverse points, got {}",
                points.len()
            )));
        }
        let mut queries = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                queries.push(TestQuery {
                    first: i,
                    second: j,
                    response: noiseless_respond(truth, &points[i], &points[j]),
                });
            }
        }
        Ok(Self { points, queries })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// Header `first_0..,second_0..,q`, one row per query, `q = 1` when the first member wins.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.points.first().map_or(0, FeatureVector::dim);
        let mut header: Vec<String> = (0..d).map(|k| format!("first_{k}")).collect();
        header.extend((0..d).map(|k| format!("second_{k}")));
        header.push("q".into());
        writeln!(out, "{}", header.join(","))?;
        for q in &self.queries {
            let mut line = String::new();
            for v in self.points[q.first].as_slice().iter().chain(self.points[q.second].as_slice()) {
                write!(line, "{v},").expect("writing to a String");
            }
            writeln!(out, "{line}{}", q.response.as_bit())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty test-set file".into()))??;
        let width = header.split(',').count();
        if width < 3 || width % 2 == 0 {
            return Err(Error::Parse(format!("malformed test-set header `{header}`")));
        }
        let d = (width - 1) / 2;
        let mut points: Vec<FeatureVector> = Vec::new();
        let index_of = |p: FeatureVector, points: &mut Vec<FeatureVector>| -> usize {
            points.iter().position(|q| *q == p).unwrap_or_else(|| {
                points.push(p);
                points.len() - 1
            })
        };
        let mut queries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != width {
                return Err(Error::Parse(format!("row {} has {} columns, expected {width}", lineno + 1, cells.len())));
            }
            let nums: Vec<f64> = cells[..2 * d]
                .iter()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 1)))?;
            let response = match cells[2 * d] {
                "1" => Preference::First,
                "0" => Preference::Second,
                other => return Err(Error::Parse(format!("row {}: q must be 0 or 1, got `{other}`", lineno + 1))),
            };
            let first = index_of(FeatureVector::new(nums[..d].to_vec())?, &mut points);
            let second = index_of(FeatureVector::new(nums[d..].to_vec())?, &mut points);
            queries.push(TestQuery { first, second, response });
        }
        Ok(Self { points, queries })
    }
}

/// How the diverse subset of the test pool is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiversitySpec {
    Radius(f64),
    TargetCount(usize),
}

/// Poisson-disk subset of `pool` with every pair answered by the noiseless user.
pub fn build_test_set<R: rand::Rng + ?Sized>(
    truth: &TrueReward,
    pool: &TrajectoryPool,
    spec: DiversitySpec,
    rng: &mut R,
) -> Result<TestSet> {
    let features = pool.features();
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.shuffle(rng);
    let radius = match spec {
        DiversitySpec::Radius(r) => r,
        DiversitySpec::TargetCount(n) => radius_for_target(&features, n, &order)?,
    };
    let kept = poisson_disk_in_order(&features, &SamplerConfig::new(radius), &order)?;
    TestSet::all_pairs(truth, kept.into_iter().map(|i| features[i].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Mean log-probability (nats) of the true answers.
    pub mean_ll: f64,
}

/// Accuracy and mean log-likelihood of the test answers under the model's
/// posterior means. A predicted probability of exactly ½ counts as wrong.
pub fn evaluate(model: &GpPosterior, test: &TestSet) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let means: Vec<f64> = test
        .points
        .iter()
        .map(|p| model.predict_point(p).map(|(m, _)| m))
        .collect::<Result<_>>()?;
    let scale = std::f64::consts::SQRT_2 * model.sigma();
    let (mut correct, mut ll) = (0usize, 0.0);
    for q in &test.queries {
        let z = (means[q.first] - means[q.second]) / scale;
        let signed = match q.response {
            Preference::First => z,
            Preference::Second => -z,
        };
        if signed > 0.0 {
            correct += 1;
        }
        ll += log_norm_cdf(signed);
    }
    let n = test.len() as f64;
    Ok(Metrics {
        accuracy: correct as f64 / n,
        mean_ll: ll / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub queries: usize,
    pub accuracy: f64,
    pub mean_ll: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub method: Method,
    pub seed: u64,
    pub rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn final_row(&self) -> &CurveRow {
        self.rows.last().expect("curves have at least one checkpoint")
    }

    pub fn at(&self, queries: usize) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.queries == queries)
    }
}

/// Everything one seed's runs share.
#[derive(Debug, Clone)]
pub struct SeedWorld {
    pub seed: u64,
    pub truth: TrueReward,
    pub train: TrajectoryPool,
    pub test: TestSet,
}

pub fn build_world(cfg: &ExperimentConfig, seed: u64) -> Result<SeedWorld> {
    let env = Environment::new(cfg.environment);
    let truth = TrueReward::sample(cfg.reward, env.feature_dim(), cfg.sigma, &mut stream_rng(seed, STREAM_TRUTH))?;
    let train = generate_pool(&env, cfg.train_pool, &mut stream_rng(seed, STREAM_TRAIN_POOL))?;
    let mut test_rng = stream_rng(seed, STREAM_TEST_SET);
    let test_pool = train.draw_more(cfg.test_pool, &mut test_rng)?;
    let spec = match (cfg.test_radius, cfg.test_target) {
        (Some(r), _) => DiversitySpec::Radius(r),
        (None, Some(n)) => DiversitySpec::TargetCount(n),
        (None, None) => return Err(Error::InvalidInput("set test_radius or test_target".into())),
    };
    let test = build_test_set(&truth, &test_pool, spec, &mut test_rng)?;
    Ok(SeedWorld { seed, truth, train, test })
}

/// Result of one (method, seed) learning loop.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub curve: LearningCurve,
    pub model: GpPosterior,
}

/// Ask `cfg.budget` queries chosen by `method`, answered by the noisy simulated
/// user, evaluating at every checkpoint.
pub fn run_method(cfg: &ExperimentConfig, world: &SeedWorld, method: Method) -> Result<MethodRun> {
    let base = STREAM_METHOD_BASE + 2 * method.stream_index();
    let mut select_rng = stream_rng(world.seed, base);
    let mut oracle_rng = stream_rng(world.seed, base + 1);
    let pool = world.train.candidate_pool();
    let checkpoints = cfg.checkpoints();
    let mut model = GpPosterior::prior(cfg.kernel_for(method)?, cfg.sigma)?;
    let mut rows = Vec::with_capacity(checkpoints.len());

    for asked in 0..=cfg.budget {
        if checkpoints.contains(&asked) {
            let m = evaluate(&model, &world.test)?;
            rows.push(CurveRow { queries: asked, accuracy: m.accuracy, mean_ll: m.mean_ll });
        }
        if asked == cfg.budget {
            break;
        }
        let choice = match method {
            Method::RandomGp => select_random_query(&model, &pool, &mut select_rng)?,
            Method::ActiveGp | Method::ActiveLinear => select_query(&model, &pool, cfg.pair_budget, &mut select_rng)?,
        };
        let (a, b) = (pool.get(choice.i), pool.get(choice.j));
        let answer = oracle_respond(&world.truth, a, b, &mut oracle_rng);
        model = model.update_pair(a, b, answer)?;
    }
    Ok(MethodRun {
        curve: LearningCurve { method, seed: world.seed, rows },
        model,
    })
}

#[derive(Debug, Clone)]
pub struct JobFailure {
    pub method: Method,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub worlds: Vec<SeedWorld>,
    /// Ordered by method (as configured), then seed.
    pub runs: Vec<MethodRun>,
    pub failures: Vec<JobFailure>,
}

impl ExperimentOutcome {
    pub fn curves(&self) -> Vec<LearningCurve> {
        self.runs.iter().map(|r| r.curve.clone()).collect()
    }

    pub fn curves_for(&self, method: Method) -> Vec<&LearningCurve> {
        self.runs.iter().map(|r| &r.curve).filter(|c| c.method == method).collect()
    }
}

/// Run every configured (method, seed) job in parallel.
pub fn run_learning_loop(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let worlds: Vec<Result<SeedWorld>> = cfg.seeds.par_iter().map(|&s| build_world(cfg, s)).collect();
    let mut failures = Vec::new();
    let mut ready = Vec::new();
    for (world, &seed) in worlds.into_iter().zip(&cfg.seeds) {
        match world {
            Ok(w) => ready.push(w),
            Err(e) => {
                for &method in &cfg.methods {
                    failures.push(JobFailure { method, seed, message: e.to_string() });
                }
            }
        }
    }
    let jobs: Vec<(Method, &SeedWorld)> = cfg
        .methods
        .iter()
        .flat_map(|&m| ready.iter().map(move |w| (m, w)))
        .collect();
    let results: Vec<Result<MethodRun>> = jobs.par_iter().map(|&(m, w)| run_method(cfg, w, m)).collect();
    let mut runs = Vec::new();
    for (result, (method, world)) in results.into_iter().zip(&jobs) {
        match result {
            Ok(run) => runs.push(run),
            Err(e) => {
                log::error!("{method} seed {} failed: {e}", world.seed);
                failures.push(JobFailure { method: *method, seed: world.seed, message: e.to_string() });
            }
        }
    }
    Ok(ExperimentOutcome { worlds: ready, runs, failures })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn curve_csv(curve: &LearningCurve) -> String {
    let mut s = String::from("queries,accuracy,mean_ll\n");
    for r in &curve.rows {
        writeln!(s, "{},{},{}", r.queries, r.accuracy, r.mean_ll).expect("writing to a String");
    }
    s
}

fn aggregate_csv(curves: &[LearningCurve]) -> String {
    let mut s = String::from("method,queries,accuracy_mean,accuracy_std,mean_ll_mean,mean_ll_std\n");
    let mut methods: Vec<Method> = Vec::new();
    for c in curves {
        if !methods.contains(&c.method) {
            methods.push(c.method);
        }
    }
    for method in methods {
        let group: Vec<&LearningCurve> = curves.iter().filter(|c| c.method == method).collect();
        for (k, row) in group[0].rows.iter().enumerate() {
            let acc: Vec<f64> = group.iter().map(|c| c.rows[k].accuracy).collect();
            let ll: Vec<f64> = group.iter().map(|c| c.rows[k].mean_ll).collect();
            let (am, asd) = mean_std(&acc);
            let (lm, lsd) = mean_std(&ll);
            writeln!(s, "{method},{},{am},{asd},{lm},{lsd}", row.queries).expect("writing to a String");
        }
    }
    s
}

/// Write `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn curve_file_name(method: Method, seed: u64) -> String {
    format!("{method}_seed{seed}.csv")
}

/// Write per-(method, seed) curves, the mean ± std aggregate and the run manifest.
pub fn emit_results(curves: &[LearningCurve], cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("no learning curves to write".into()));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for c in curves {
        let path = dir.join(curve_file_name(c.method, c.seed));
        write_atomic(&path, curve_csv(c).as_bytes())?;
        written.push(path);
    }
    let agg = dir.join("aggregate.csv");
    write_atomic(&agg, aggregate_csv(curves).as_bytes())?;
    written.push(agg);
    let manifest = dir.join("manifest.toml");
    write_atomic(&manifest, cfg.to_toml_string().as_bytes())?;
    written.push(manifest);
    Ok(written)
}

/// [`emit_results`] plus each seed's test set and each run's final model snapshot.
pub fn emit_outcome(outcome: &ExperimentOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = emit_results(&outcome.curves(), cfg, dir)?;
    for world in &outcome.worlds {
        let mut buf = Vec::new();
        world.test.write_csv(&mut buf)?;
        let path = dir.join(format!("test_seed{}.csv", world.seed));
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    for run in &outcome.runs {
        let mut buf = Vec::new();
        write_snapshot(&run.model, &mut buf)?;
        let path = dir.join(format!("model_{}_seed{}.txt", run.curve.method, run.curve.seed));
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    Ok(written)
}
