//! Weighted two-sample statistics: reweighting a shifted sample towards
//! the reference closes the KS gap.
//!
//! cargo run --example weighted_ks

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use vv::metrics::{Metric, WeightedEmpirical};

fn main() -> vv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reference: Vec<f64> = (0..2000)
        .map(|_| Normal::new(1.0, 1.0).unwrap().sample(&mut rng))
        .collect();
    let shifted: Vec<f64> = (0..2000)
        .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng))
        .collect();
    // exact density ratio N(1,1)/N(0,1) = exp(x − 1/2)
    let ratio: Vec<f64> = shifted.iter().map(|x| (x - 0.5).exp()).collect();

    let a = WeightedEmpirical::unweighted(reference)?;
    let plain = WeightedEmpirical::unweighted(shifted.clone())?;
    let weighted = WeightedEmpirical::new(shifted, ratio)?;
    for m in [Metric::Ks, Metric::MeanDiff, Metric::Wasserstein1] {
        println!(
            "{:<13} unweighted {:.4}   weighted {:.4}",
            m.name(),
            m.compute(&a, &plain),
            m.compute(&a, &weighted)
        );
    }
    Ok(())
}
