//! Save a fitted model as text and reload it bit-exactly.
//!
//!     cargo run -p prefgp --example snapshot_roundtrip

use prefgp::snapshot::{read_snapshot, write_snapshot};
use prefgp::{FeatureVector, GpPosterior, KernelConfig, KernelKind, Preference};

fn main() -> prefgp::Result<()> {
    let p = |x: f64, y: f64| FeatureVector::new(vec![x, y]);
    let model = GpPosterior::prior(KernelConfig::default_for(KernelKind::AnchoredRbf, 2), 1.0)?
        .update_pair(&p(0.1, 0.2)?, &p(0.9, 0.7)?, Preference::Second)?
        .update_pair(&p(0.9, 0.7)?, &p(1.0 / 3.0, 0.4)?, Preference::First)?;

    let mut text = Vec::new();
    write_snapshot(&model, &mut text)?;
    print!("{}", String::from_utf8_lossy(&text));

    let back = read_snapshot(text.as_slice())?;
    let same = back.mode().iter().zip(model.mode().iter()).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("reloaded mode bit-identical: {same}");
    Ok(())
}
