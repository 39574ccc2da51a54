//! Reward learning from pairwise preferences with a Gaussian-process reward
//! model and information-gain query selection.
//!
//! * [`kernel`]: anchored RBF and linear kernels, Gram matrices.
//! * [`gp_pref`]: Laplace-approximated GP posterior under the probit model.
//! * [`acquisition`]: closed-form information gain and pool-based query search.
//! * [`sim_env`]: surrogate environments, simulated users, Poisson-disk sampling.
//! * [`experiment`]: learning-curve harness and result files.
//! * [`snapshot`]: plain-text model snapshots.

pub mod acquisition;
pub mod error;
pub mod experiment;
pub mod gp_pref;
pub mod kernel;
pub mod probit;
pub mod sim_env;
pub mod snapshot;

pub use acquisition::{select_query, select_random_query, CandidatePool, PairStats, QueryChoice};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Method};
pub use gp_pref::{fit, GpPosterior, PairPrediction, Preference, PreferenceDatum};
pub use kernel::{FeatureVector, KernelConfig, KernelKind};
pub use sim_env::{Environment, EnvironmentKind, RewardKind, TrajectoryPool, TrueReward};
