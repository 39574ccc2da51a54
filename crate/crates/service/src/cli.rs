//! Command-line front end: experiments, offline evaluation, pool export and
//! the HTTP server.

use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use prefgp::experiment::{emit_outcome, evaluate, run_learning_loop, stream_rng, TestSet};
use prefgp::sim_env::generate_pool;
use prefgp::snapshot::read_snapshot;
use prefgp::{Environment, EnvironmentKind, ExperimentConfig};

use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "prefgp", version, about = "Active preference-based GP reward learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run simulated learning-curve experiments from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a saved model on a saved test set.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Write a random trajectory pool to CSV.
    Pool {
        #[arg(long)]
        env: EnvironmentKind,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the elicitation HTTP API.
    Serve {
        #[arg(long, env = "PREFGP_BIND", default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        #[arg(long, env = "PREFGP_PORT", default_value_t = 8080)]
        port: u16,
        /// Where sessions are persisted.
        #[arg(long, env = "PREFGP_DATA_DIR", default_value = "prefgp-data")]
        data_dir: PathBuf,
    },
}

pub type CliResult = Result<(), Box<dyn std::error::Error + Send + Sync>>;

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Run { config, out } => run_experiment(config, out),
        Command::Evaluate { model, test } => {
            let model = read_snapshot(BufReader::new(File::open(&model)?))?;
            let test = TestSet::read_csv(BufReader::new(File::open(&test)?))?;
            let m = evaluate(&model, &test)?;
            println!("queries {}", test.len());
            println!("accuracy {}", m.accuracy);
            println!("mean_ll {}", m.mean_ll);
            Ok(())
        }
        Command::Pool { env, size, seed, out } => {
            let env = Environment::new(env);
            // Same stream as experiment training pools, so `pool --seed s` matches seed s.
            let pool = generate_pool(&env, size, &mut stream_rng(seed, 2))?;
            pool.write_csv(File::create(&out)?)?;
            println!("wrote {} {} trajectories to {}", pool.len(), env.kind(), out.display());
            Ok(())
        }
        Command::Serve { bind, port, data_dir } => serve(SocketAddr::new(bind, port), data_dir),
    }
}

fn run_experiment(config: PathBuf, out: Option<PathBuf>) -> CliResult {
    let cfg = ExperimentConfig::from_toml_str(&std::fs::read_to_string(&config)?)?;
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let outcome = run_learning_loop(&cfg)?;
    let files = emit_outcome(&outcome, &cfg, &dir)?;
    for curve in outcome.curves() {
        let last = curve.final_row();
        println!(
            "{:<14} seed {:<4} queries {:<4} accuracy {:.3} mean_ll {:.3}",
            curve.method.as_str(),
            curve.seed,
            last.queries,
            last.accuracy,
            last.mean_ll
        );
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        for f in &outcome.failures {
            eprintln!("error: {} seed {}: {}", f.method, f.seed, f.message);
        }
        Err(format!("{} job(s) failed", outcome.failures.len()).into())
    }
}

fn serve(addr: SocketAddr, data_dir: PathBuf) -> CliResult {
    let store = Arc::new(SessionStore::open(&data_dir)?);
    log::info!("loaded {} session(s) from {}", store.len(), data_dir.display());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::router(store))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
