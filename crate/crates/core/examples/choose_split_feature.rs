//! Picking the split property with the highest mean absolute Spearman
//! correlation to the others.
//!
//! cargo run --example choose_split_feature

use vv::graph::{PropertyMatrix, PropertyRegistry};
use vv::pipeline::select_split_property;
use vv::synthetic::{CommConfig, ErConfig, GroundTruth};

fn main() -> vv::Result<()> {
    let registry = PropertyRegistry::canonical();
    for truth in [
        GroundTruth::Er(ErConfig {
            num_nodes: 18,
            edge_prob: 0.3,
            seed: 4,
        }),
        GroundTruth::Comm(CommConfig {
            nodes_per_community: (6, 10),
            intra_prob: 0.7,
            seed: 4,
        }),
    ] {
        let props = PropertyMatrix::compute(&truth.sample_range(0..300, "g")?, &registry)?;
        let sel = select_split_property(&props)?;
        println!("{truth:?}");
        for (name, rho) in registry.names().iter().zip(&sel.mean_abs_correlation) {
            println!("  {name:<22} mean |ρ| = {rho:.4}");
        }
        println!("  chosen: {}", registry.names()[sel.index]);
    }
    Ok(())
}
