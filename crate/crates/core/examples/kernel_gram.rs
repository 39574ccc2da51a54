//! Build an anchored RBF Gram matrix and look at what anchoring does.
//!
//!     cargo run -p prefgp --example kernel_gram

use nalgebra::SymmetricEigen;
use prefgp::kernel::{gram_matrix, kernel_matrix};
use prefgp::{FeatureVector, KernelConfig, KernelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> prefgp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<FeatureVector> = (0..50)
        .map(|_| FeatureVector::new(vec![rng.random(), rng.random()]))
        .collect::<prefgp::Result<_>>()?;

    let cfg = KernelConfig::default_for(KernelKind::AnchoredRbf, 2);
    let k = kernel_matrix(&points, &cfg)?;
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    println!("50 points, theta = {}, anchor = {:?}", cfg.theta, cfg.anchor.as_slice());
    println!("eigenvalues before jitter: min {:.3e}, max {:.3}", eig.min(), eig.max());

    let anchor = cfg.anchor.clone();
    println!("prior variance at the anchor: {}", cfg.eval(&anchor, &anchor)?);
    for corner in [[0.0, 0.0], [1.0, 1.0], [0.5, 0.9]] {
        let x = FeatureVector::new(corner.to_vec())?;
        println!("prior variance at {corner:?}: {:.4}", cfg.eval(&x, &x)?);
    }

    let gram = gram_matrix(&points, &cfg)?;
    println!("jittered Gram is {}x{} and factorizes", gram.nrows(), gram.ncols());

    let mut dup = points[..3].to_vec();
    dup.push(points[1].clone());
    match gram_matrix(&dup, &cfg.clone().with_jitter(0.0)?) {
        Ok(_) => println!("unexpected: duplicate points factorized without jitter"),
        Err(e) => println!("duplicates without jitter: {e}"),
    }
    Ok(())
}
