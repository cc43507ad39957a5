//! Experiment orchestration: nested splits, the generation loop, per-cell
//! evaluation, aggregation and reports.

pub mod config;
pub mod evaluate;
pub mod experiment;
pub mod report;
pub mod sampling;
pub mod select;
pub mod splits;

pub use config::{
    DatasetSpec, ExperimentConfig, InnerSplitSpec, ModelSpec, OuterSplitSpec, PropertyRef,
};
pub use evaluate::{evaluate_all_tests, evaluate_cell, CellRecord};
pub use experiment::{
    configured_split, dump_pool, model_pool, prepare, run_matrix, run_single_cell, run_validation,
    Prepared, Setting, SettingResult, ValidationReport,
};
pub use report::{aggregate, Aggregations, EvalReport, Provenance, UseCase};
pub use sampling::{
    generate_until_neff, load_imported, split_hash, weigh_imported, weight_samples, GeneratedPool,
    GraphSource, NeffTarget, SampleManifest, Warning,
};
pub use select::{average_ranks, select_split_property, spearman, SplitSelection};
pub use splits::{
    horizontal_baseline, nested_split, split_property, split_values, NestedSplit, PropertySplit,
};
