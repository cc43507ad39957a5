//! The synthetic families and the five reference models.
//!
//! cargo run --example synthetic_models

use vv::graph::{PropertyMatrix, PropertyRegistry};
use vv::synthetic::{CommConfig, ErConfig, GroundTruth, ModelKind, ReferenceModel};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn main() -> vv::Result<()> {
    let registry = PropertyRegistry::synthetic();
    let families = [
        GroundTruth::Er(ErConfig {
            num_nodes: 20,
            edge_prob: 0.5,
            seed: 1,
        }),
        GroundTruth::Comm(CommConfig {
            nodes_per_community: (6, 10),
            intra_prob: 0.7,
            seed: 1,
        }),
    ];
    for truth in families {
        let train = truth.sample_range(0..200, "train")?;
        println!("{truth:?}");
        println!("  {:<12}{}", "model", registry.names().join("  "));
        for kind in ModelKind::ALL {
            let model = ReferenceModel::new(kind, &train, &truth, 9)?;
            let props = PropertyMatrix::compute(&model.sample_range(0..500)?, &registry)?;
            let means: Vec<String> = (0..registry.len())
                .map(|l| format!("{:>10.3}", mean(&props.column(l))))
                .collect();
            println!("  {:<12}{}", kind.name(), means.join("  "));
        }
    }
    Ok(())
}
