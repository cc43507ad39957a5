use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::evaluate::CellRecord;

/// Which cells an aggregation averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UseCase {
    /// All cells.
    Overall,
    /// All cells with the given test property.
    PerTestProperty(usize),
    /// Cells with the given test property and `j ∈ {1, k}`.
    EdgeSplits(usize),
}

/// Mean KS over the cells selected by `mode`.
pub fn aggregate(cells: &[CellRecord], mode: UseCase, k: usize) -> Result<f64> {
    let selected: Vec<f64> = cells
        .iter()
        .filter(|c| match mode {
            UseCase::Overall => true,
            UseCase::PerTestProperty(t) => c.test_property == t,
            UseCase::EdgeSplits(t) => {
                c.test_property == t && (c.split_index == 1 || c.split_index == k)
            }
        })
        .map(|c| c.ks)
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptySlice);
    }
    Ok(selected.iter().sum::<f64>() / selected.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregations {
    pub use_case_1: f64,
    /// Indexed by test property; `None` when the slice is empty.
    pub use_case_2: Vec<Option<f64>>,
    pub use_case_3: Vec<Option<f64>>,
}

impl Aggregations {
    pub fn compute(cells: &[CellRecord], k: usize, num_properties: usize) -> Result<Self> {
        let per = |f: fn(usize) -> UseCase| -> Result<Vec<Option<f64>>> {
            (0..num_properties)
                .map(|t| match aggregate(cells, f(t), k) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::EmptySlice) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect()
        };
        Ok(Self {
            use_case_1: aggregate(cells, UseCase::Overall, k)?,
            use_case_2: per(UseCase::PerTestProperty)?,
            use_case_3: per(UseCase::EdgeSplits)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical config JSON.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub k: usize,
    pub properties: Vec<String>,
    /// Sorted by `(split_property, split_index, test_property)`.
    pub cells: Vec<CellRecord>,
    pub aggregations: Aggregations,
    pub provenance: Provenance,
}

impl EvalReport {
    pub fn new(
        model: String,
        k: usize,
        properties: Vec<String>,
        mut cells: Vec<CellRecord>,
        provenance: Provenance,
    ) -> Result<Self> {
        cells.sort_by_key(|c| (c.split_property, c.split_index, c.test_property));
        let aggregations = Aggregations::compute(&cells, k, properties.len())?;
        let report = Self {
            model,
            k,
            properties,
            cells,
            aggregations,
            provenance,
        };
        report.audit()?;
        Ok(report)
    }

    /// Checks the cell invariants and recomputes every aggregation from
    /// the cells.
    pub fn audit(&self) -> Result<()> {
        for c in &self.cells {
            if c.test_property == c.split_property {
                return Err(Error::PropertyIndexMismatch {
                    split: c.split_property,
                    test: c.test_property,
                });
            }
            if !(c.n_eff >= 1.0 && c.n_eff <= c.n_generated as f64 * (1.0 + 1e-9)) {
                return Err(Error::Config(format!(
                    "cell ({}, {}, {}) has n_eff {} outside [1, {}]",
                    c.split_property, c.split_index, c.test_property, c.n_eff, c.n_generated
                )));
            }
        }
        let again = Aggregations::compute(&self.cells, self.k, self.properties.len())?;
        if again != self.aggregations {
            return Err(Error::Config(
                "report aggregations disagree with its cells".into(),
            ));
        }
        Ok(())
    }

    /// True if the report covers every `(ℓ, j, ℓ′)` with `ℓ′ ≠ ℓ` once.
    pub fn is_complete(&self) -> bool {
        let m = self.properties.len();
        let mut expected = Vec::new();
        for l in 0..m {
            for j in 1..=self.k {
                for t in (0..m).filter(|&t| t != l) {
                    expected.push((l, j, t));
                }
            }
        }
        let got: Vec<_> = self
            .cells
            .iter()
            .map(|c| (c.split_property, c.split_index, c.test_property))
            .collect();
        got == expected
    }

    pub fn has_neff_stall(&self) -> bool {
        self.cells
            .iter()
            .any(|c| c.warnings.iter().any(|w| w.is_neff_stall()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(s)?;
        report.audit()?;
        Ok(report)
    }

    /// One row per cell.
    pub fn write_cells_csv(&self, w: impl Write) -> Result<()> {
        let mut metric_names: Vec<&String> =
            self.cells.iter().flat_map(|c| c.metrics.keys()).collect();
        metric_names.sort();
        metric_names.dedup();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["split_property", "split_index", "test_property"];
        header.extend(metric_names.iter().map(|s| s.as_str()));
        header.extend(["n_eff", "n_generated", "warnings"]);
        out.write_record(&header)?;
        for c in &self.cells {
            let mut row = vec![
                self.properties[c.split_property].clone(),
                c.split_index.to_string(),
                self.properties[c.test_property].clone(),
            ];
            row.extend(
                metric_names
                    .iter()
                    .map(|m| c.metrics.get(*m).map(|v| v.to_string()).unwrap_or_default()),
            );
            row.push(c.n_eff.to_string());
            row.push(c.n_generated.to_string());
            row.push(
                c.warnings
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            );
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Use-case table: one row per test property plus an overall row.
    pub fn write_summary_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["test_property", "use_case_2", "use_case_3"])?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (t, name) in self.properties.iter().enumerate() {
            out.write_record([
                name.clone(),
                fmt(self.aggregations.use_case_2[t]),
                fmt(self.aggregations.use_case_3[t]),
            ])?;
        }
        out.write_record([
            "all".to_string(),
            self.aggregations.use_case_1.to_string(),
            String::new(),
        ])?;
        out.flush()?;
        Ok(())
    }
}
