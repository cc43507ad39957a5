//! Nested vertical vs horizontal validation of the five reference models on
//! 500 `G(20, 0.5)` graphs (or two-community graphs with `--comm`).
//!
//! cargo run --release --example model_selection -- [seed] [--comm]

use vv::pipeline::{run_validation, ExperimentConfig, Setting};
use vv::synthetic::{CommConfig, GroundTruth};

fn main() -> vv::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed = args.iter().find_map(|a| a.parse().ok()).unwrap_or(0);
    let cfg = if args.iter().any(|a| a == "--comm") {
        ExperimentConfig::synthetic_validation(
            GroundTruth::Comm(CommConfig {
                nodes_per_community: (6, 10),
                intra_prob: 0.7,
                seed: 0,
            }),
            seed,
        )
    } else {
        ExperimentConfig::er_validation(seed)
    };
    let report = run_validation(&cfg)?;
    println!(
        "split property: {}  |v_train|={} |v_val|={} |v_test|={}",
        report.properties[report.split_property],
        report.vertical.v_train.len(),
        report.vertical.v_val.len(),
        report.vertical.v_test.len()
    );
    println!(
        "{:<12}{:>10}{:>10}{:>10}{:>10}",
        "model", "v-test", "v-val", "h-test", "h-val"
    );
    for spec in &cfg.models {
        let name = spec.name();
        let cell = |s| report.mean_ks(s, &name).unwrap_or(f64::NAN);
        println!(
            "{:<12}{:>10.4}{:>10.4}{:>10.4}{:>10.4}",
            name,
            cell(Setting::VTest),
            cell(Setting::VVal),
            cell(Setting::HTest),
            cell(Setting::HVal)
        );
    }
    for r in &report.results {
        for w in r.warnings() {
            println!("warning [{} {}]: {w}", r.setting.name(), r.model);
        }
    }
    Ok(())
}
