//! Exhaustive (split property, held split, test property) evaluation of two
//! reference models on a small ER dataset, with the use-case aggregations.
//!
//! cargo run --release --example property_matrix

use vv::pipeline::{run_matrix, DatasetSpec, ExperimentConfig, ModelSpec};
use vv::synthetic::{ErConfig, GroundTruth, ModelKind};

fn main() -> vv::Result<()> {
    let mut cfg = ExperimentConfig::er_validation(3);
    cfg.dataset = DatasetSpec::Synthetic {
        truth: GroundTruth::Er(ErConfig {
            num_nodes: 16,
            edge_prob: 0.3,
            seed: 0,
        }),
        count: 200,
    };
    cfg.inner_split = None;
    cfg.split.k = 4;
    cfg.models = [ModelKind::Oracle, ModelKind::ExactMemo]
        .into_iter()
        .map(|kind| ModelSpec::Reference {
            kind,
            ground_truth: None,
        })
        .collect();

    for report in run_matrix(&cfg)? {
        println!(
            "{}: {} cells, overall KS {:.4}",
            report.model,
            report.cells.len(),
            report.aggregations.use_case_1
        );
        for (t, name) in report.properties.iter().enumerate() {
            println!(
                "  {name:<16} all splits {:.4}   edge splits {:.4}",
                report.aggregations.use_case_2[t].unwrap_or(f64::NAN),
                report.aggregations.use_case_3[t].unwrap_or(f64::NAN)
            );
        }
        report.write_cells_csv(std::io::stdout().lock())?;
    }
    Ok(())
}
