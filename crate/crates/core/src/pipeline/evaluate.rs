use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PropertyMatrix;
use crate::metrics::{held_and_generated, Metric};

use super::sampling::{GeneratedPool, Warning};

/// Result for one `(split property ℓ, held split j, test property ℓ′)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub split_property: usize,
    /// 1-based held split index.
    pub split_index: usize,
    pub test_property: usize,
    pub ks: f64,
    /// Every requested metric by name, KS included.
    pub metrics: BTreeMap<String, f64>,
    pub n_eff: f64,
    pub n_generated: usize,
    pub warnings: Vec<Warning>,
}

/// Compares held rows with the weighted pool on test property `test`.
pub fn evaluate_cell(
    held: &PropertyMatrix,
    pool: &GeneratedPool,
    split_property: usize,
    split_index: usize,
    test_property: usize,
    metrics: &[Metric],
) -> Result<CellRecord> {
    if test_property == split_property {
        return Err(Error::PropertyIndexMismatch {
            split: split_property,
            test: test_property,
        });
    }
    let (h, g) = held_and_generated(held, &pool.samples, test_property)?;
    let mut values = BTreeMap::new();
    let ks = Metric::Ks.compute(&h, &g);
    values.insert(Metric::Ks.name().to_string(), ks);
    for &m in metrics {
        values.insert(m.name().to_string(), m.compute(&h, &g));
    }
    Ok(CellRecord {
        split_property,
        split_index,
        test_property,
        ks,
        metrics: values,
        n_eff: pool.n_eff,
        n_generated: pool.len(),
        warnings: pool.warnings.clone(),
    })
}

/// Cells for every test property other than the split property.
pub fn evaluate_all_tests(
    held: &PropertyMatrix,
    pool: &GeneratedPool,
    split_property: usize,
    split_index: usize,
    metrics: &[Metric],
) -> Result<Vec<CellRecord>> {
    (0..held.num_properties())
        .filter(|&t| t != split_property)
        .map(|t| evaluate_cell(held, pool, split_property, split_index, t, metrics))
        .collect()
}
