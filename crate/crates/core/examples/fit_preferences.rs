//! Fit the Laplace posterior to a handful of answers and query it.
//!
//!     cargo run -p prefgp --example fit_preferences

use prefgp::{fit, FeatureVector, KernelConfig, KernelKind, Preference, PreferenceDatum};

fn main() -> prefgp::Result<()> {
    // Five 1-d trajectories; the user prefers values closer to 0.8.
    let xs = [0.0, 0.25, 0.6, 0.8, 1.0];
    let points: Vec<FeatureVector> = xs.iter().map(|&x| FeatureVector::new(vec![x])).collect::<prefgp::Result<_>>()?;
    let answers = [(3, 0, Preference::First), (1, 3, Preference::Second), (2, 4, Preference::First), (2, 1, Preference::First)];
    let data: Vec<PreferenceDatum> = answers
        .iter()
        .map(|&(a, b, q)| PreferenceDatum::new(a, b, q))
        .collect::<prefgp::Result<_>>()?;

    let model = fit(points.clone(), data, KernelConfig::default_for(KernelKind::AnchoredRbf, 1), 0.5)?;
    println!("Newton iterations: {}", model.newton_iterations());
    println!("stationarity residual: {:.2e}", model.stationarity_residual());
    for (x, f) in xs.iter().zip(model.mode().iter()) {
        println!("  f({x:.2}) = {f:+.4}");
    }

    println!("posterior on a grid (mean ± std):");
    for k in 0..=10 {
        let x = FeatureVector::new(vec![k as f64 / 10.0])?;
        let (mean, var) = model.predict_point(&x)?;
        println!("  {:.1}: {:+.4} ± {:.4}", x[0], mean, var.sqrt());
    }

    let pair = model.predict_pair(&points[3], &points[4])?;
    println!("P(0.8 preferred over 1.0) via the posterior mean: {:.3}", prefgp::probit::norm_cdf((pair.mean[0] - pair.mean[1]) / (2f64.sqrt() * model.sigma())));
    println!("difference variance g = {:.4}", pair.difference_variance());

    let updated = model.update_pair(&points[3], &points[4], Preference::First)?;
    let after = updated.predict_pair(&points[3], &points[4])?;
    println!(
        "after one more answer: mean gap {:+.4} -> {:+.4}, g {:.4} -> {:.4}",
        pair.mean[0] - pair.mean[1],
        after.mean[0] - after.mean[1],
        pair.difference_variance(),
        after.difference_variance()
    );
    Ok(())
}
