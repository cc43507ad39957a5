//! Kernel mean matching weights for uniform samples against a Beta(5, 1)
//! target, compared with the true density ratio 5u⁴.
//!
//! cargo run --release --example kmm_weights

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use vv::pipeline::spearman;
use vv::weights::{effective_sample_size, estimate_weights, KmmConfig};

fn main() -> vv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1000;
    let gen: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let beta = Beta::new(5.0, 1.0).unwrap();
    let held: Vec<f64> = (0..n).map(|_| beta.sample(&mut rng)).collect();

    let fit = estimate_weights(&gen, &held, &KmmConfig::default())?;
    let truth: Vec<f64> = gen.iter().map(|u| 5.0 * u.powi(4)).collect();
    println!(
        "γ = {:.2}, {} iterations, converged: {}",
        fit.gamma, fit.iterations, fit.converged
    );
    println!("N_eff = {:.1} of {n}", effective_sample_size(&fit.weights)?);
    println!(
        "Spearman(weights, 5u⁴) = {:.4}",
        spearman(&fit.weights, &truth).unwrap_or(f64::NAN)
    );
    for lo in [0.0, 0.5, 0.8, 0.9, 0.95] {
        let bin: Vec<f64> = gen
            .iter()
            .zip(&fit.weights)
            .filter(|(u, _)| **u >= lo && **u < lo + 0.05)
            .map(|(_, w)| *w)
            .collect();
        let mid = lo + 0.025;
        println!(
            "u in [{lo:.2}, {:.2}): mean weight {:.3}, true ratio {:.3}",
            lo + 0.05,
            bin.iter().sum::<f64>() / bin.len().max(1) as f64,
            5.0 * f64::powi(mid, 4)
        );
    }
    Ok(())
}
