//! Pick a diverse test set from the tosser surrogate with Poisson-disk
//! sampling and compare it to a uniform subsample.
//!
//!     cargo run -p prefgp --example poisson_test_set -- [out.csv]

use prefgp::experiment::{build_test_set, DiversitySpec};
use prefgp::sim_env::generate_pool;
use prefgp::{Environment, EnvironmentKind, RewardKind, TrueReward};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spread(points: &[prefgp::FeatureVector]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            min = min.min(points[i].squared_distance(&points[j]).sqrt());
        }
    }
    let mean_range = points.iter().map(|p| p[0]).sum::<f64>() / points.len() as f64;
    (min, mean_range)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let env = Environment::new(EnvironmentKind::Tosser2d);
    let pool = generate_pool(&env, 1000, &mut rng)?;
    let truth = TrueReward::sample(RewardKind::Poly2, 2, 1.0, &mut rng)?;

    let test = build_test_set(&truth, &pool, DiversitySpec::TargetCount(20), &mut rng)?;
    let (min_d, range) = spread(&test.points);
    println!("Poisson disk: {} points, {} queries, min distance {min_d:.3}, mean range feature {range:.3}", test.points.len(), test.len());

    let features = pool.features();
    let uniform: Vec<_> = sample(&mut rng, features.len(), 20).into_iter().map(|i| features[i].clone()).collect();
    let (min_u, range_u) = spread(&uniform);
    println!("uniform:      20 points, min distance {min_u:.3}, mean range feature {range_u:.3}");

    if let Some(path) = std::env::args().nth(1) {
        test.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
