//! Score every pair of a candidate pool and ask the most informative one,
//! answering with a simulated user.
//!
//!     cargo run --release -p prefgp --example active_query -- [queries]

use prefgp::acquisition::PoolCache;
use prefgp::sim_env::{generate_pool, oracle_respond};
use prefgp::{select_query, Environment, EnvironmentKind, GpPosterior, KernelConfig, KernelKind, RewardKind, TrueReward};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let queries: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let env = Environment::new(EnvironmentKind::Minigolf2d);
    let pool = generate_pool(&env, 200, &mut rng)?;
    let candidates = pool.candidate_pool();
    let truth = TrueReward::sample(RewardKind::Poly2, 2, 1.0, &mut rng)?;
    let mut model = GpPosterior::prior(KernelConfig::default_for(KernelKind::AnchoredRbf, 2), 1.0)?;

    let cache = PoolCache::new(&model, &candidates)?;
    let mut top: Vec<_> = (0..candidates.len())
        .flat_map(|i| (i + 1..candidates.len()).map(move |j| (i, j)))
        .map(|(i, j)| cache.choice(i, j))
        .collect();
    top.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    println!("most informative first questions (bits):");
    for c in &top[..5] {
        println!("  ({:3}, {:3})  {:.4}  g = {:.3}", c.i, c.j, c.objective, c.stats.g);
    }

    println!("{:>3}  {:>18}  {:>18}  {:>7}  answer", "q", "first (angle, v)", "second (angle, v)", "bits");
    for k in 1..=queries {
        let c = select_query(&model, &candidates, None, &mut rng)?;
        let (a, b) = (candidates.get(c.i), candidates.get(c.j));
        let answer = oracle_respond(&truth, a, b, &mut rng);
        let pa = &pool.trajectories()[c.i].params;
        let pb = &pool.trajectories()[c.j].params;
        println!(
            "{k:>3}  ({:+.2}, {:.2})      ({:+.2}, {:.2})      {:.4}  {:?}",
            pa[0], pa[1], pb[0], pb[1], c.objective, answer
        );
        model = model.update_pair(a, b, answer)?;
    }
    println!("model now holds {} distinct trajectories", model.points().len());
    Ok(())
}
