//! Compare ActiveGP, RandomGP and ActiveLinear against a simulated user.
//!
//!     cargo run --release -p prefgp --example learning_curves -- [config.toml] [out_dir]
//!
//! Without a config this runs the tosser surrogate with a quadratic true
//! reward, 5 seeds and 50 queries per method.

use prefgp::experiment::{emit_outcome, mean_std, run_learning_loop};
use prefgp::{ExperimentConfig, Method};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig { budget: 50, ..Default::default() },
    };
    let started = Instant::now();
    let outcome = run_learning_loop(&cfg)?;
    println!("{} jobs in {:.1?}", outcome.runs.len(), started.elapsed());
    for f in &outcome.failures {
        eprintln!("FAILED {} seed {}: {}", f.method, f.seed, f.message);
    }
    for w in &outcome.worlds {
        println!("seed {}: {} test points, {} test queries", w.seed, w.test.points.len(), w.test.len());
    }

    println!("{:<14} {:>9} {:>16} {:>16}", "method", "queries", "accuracy", "mean_ll");
    for &method in &cfg.methods {
        let curves = outcome.curves_for(method);
        if curves.is_empty() {
            continue;
        }
        for (k, row) in curves[0].rows.iter().enumerate() {
            if row.queries % 10 != 0 && row.queries != cfg.budget {
                continue;
            }
            let acc: Vec<f64> = curves.iter().map(|c| c.rows[k].accuracy).collect();
            let ll: Vec<f64> = curves.iter().map(|c| c.rows[k].mean_ll).collect();
            let (am, asd) = mean_std(&acc);
            let (lm, lsd) = mean_std(&ll);
            println!("{:<14} {:>9} {:>8.3} ± {:<5.3} {:>8.3} ± {:<5.3}", method.as_str(), row.queries, am, asd, lm, lsd);
        }
    }
    let finals = |m: Method| -> Vec<f64> {
        outcome.curves_for(m).iter().map(|c| c.final_row().accuracy).collect()
    };
    for &method in &cfg.methods {
        println!("final accuracy per seed, {method}: {:?}", finals(method));
    }

    if let Some(dir) = args.next().map(std::path::PathBuf::from).or_else(|| cfg.output.clone()) {
        let files = emit_outcome(&outcome, &cfg, &dir)?;
        println!("wrote {} files to {}", files.len(), dir.display());
    }
    Ok(())
}
