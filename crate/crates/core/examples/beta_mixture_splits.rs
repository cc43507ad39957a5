//! Split densities, conditional split probabilities and the resulting
//! label/property dependence for a few (ψ, ε) settings.
//!
//! cargo run --example beta_mixture_splits

use vv::projection::UnitProjection;
use vv::splitter::{assign_splits, split_mutual_information, SplitConfig, SplitKernel};

fn main() -> vv::Result<()> {
    let k = 5;
    for (psi, eps) in [(1, 0.0), (10, 0.01), (100, 0.0), (10, 1.0)] {
        let cfg = SplitConfig::new(k, psi, eps, 0, 1)?;
        let kernel = SplitKernel::new(&cfg)?;
        let mi = split_mutual_information(&cfg, 2000)?;
        println!("ψ = {psi:<3} ε = {eps:<4}  I(S; U) = {mi:.4} nats");
        for u in [0.1, 0.5, 0.9] {
            let probs: Vec<String> = kernel
                .conditional_probs(u)
                .iter()
                .map(|p| format!("{p:.3}"))
                .collect();
            println!("    P(S | u = {u}) = [{}]", probs.join(", "));
        }
    }

    let n = 1000;
    let proj = UnitProjection {
        values: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
    };
    let a = assign_splits(&proj, &SplitConfig::new(k, 10, 0.01, 0, 3)?)?;
    println!("split sizes for n = {n}: {:?}", a.sizes());
    let mean_u: Vec<String> = (1..=k)
        .map(|j| {
            let held = a.held(j);
            format!(
                "{:.3}",
                held.iter().map(|&i| proj.values[i]).sum::<f64>() / held.len() as f64
            )
        })
        .collect();
    println!("mean u per split: [{}]", mean_u.join(", "));
    Ok(())
}
