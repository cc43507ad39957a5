use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{read_jsonl, Graph, PropertyMatrix, PropertyRegistry};
use crate::synthetic::ReferenceModel;
use crate::weights::{effective_sample_size, estimate_weights, KmmConfig, WeightedSample};

/// Anything that yields graphs for stream indices.
pub trait GraphSource: Sync {
    fn sample_range(&self, range: Range<usize>) -> Result<Vec<Graph>>;
}

impl GraphSource for ReferenceModel {
    fn sample_range(&self, range: Range<usize>) -> Result<Vec<Graph>> {
        ReferenceModel::sample_range(self, range)
    }
}

/// Batch-size and stopping rule for the generation loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeffTarget {
    /// `t = min(cap, |held|)`.
    pub cap: usize,
    pub max_batches: usize,
}

impl Default for NeffTarget {
    fn default() -> Self {
        Self {
            cap: 1000,
            max_batches: 50,
        }
    }
}

impl NeffTarget {
    pub fn threshold(&self, held_size: usize) -> usize {
        self.cap.min(held_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 || self.max_batches == 0 {
            return Err(Error::Config(
                "n_eff cap and max_batches must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Non-fatal conditions attached to a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Warning {
    /// The batch cap was hit before `N_eff` reached the target.
    NeffStall {
        n_eff: f64,
        target: usize,
        batches: usize,
    },
    KmmNotConverged {
        iterations: usize,
    },
}

impl Warning {
    pub fn is_neff_stall(&self) -> bool {
        matches!(self, Warning::NeffStall { .. })
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::NeffStall {
                n_eff,
                target,
                batches,
            } => write!(
                f,
                "effective sample size {n_eff:.1} below target {target} after {batches} batches"
            ),
            Warning::KmmNotConverged { iterations } => {
                write!(
                    f,
                    "kernel mean matching did not converge in {iterations} iterations"
                )
            }
        }
    }
}

/// Weighted generated pool for one held split.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPool {
    pub samples: Vec<WeightedSample>,
    pub n_eff: f64,
    pub batches: usize,
    pub target: usize,
    pub reached: bool,
    pub gamma: f64,
    pub warnings: Vec<Warning>,
}

impl GeneratedPool {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Weights generated property rows against the held split-property values.
pub fn weight_samples(
    generated: &PropertyMatrix,
    split_property: usize,
    held_z: &[f64],
    kmm: &KmmConfig,
) -> Result<(Vec<WeightedSample>, f64, f64, Option<Warning>)> {
    generated.registry.check_index(split_property)?;
    let gen_z = generated.column(split_property);
    let fit = estimate_weights(&gen_z, held_z, kmm)?;
    let n_eff = effective_sample_size(&fit.weights)?;
    let warning = (!fit.converged).then_some(Warning::KmmNotConverged {
        iterations: fit.iterations,
    });
    let samples = generated
        .rows
        .iter()
        .zip(&fit.weights)
        .map(|(row, &weight)| WeightedSample {
            property_vector: row.clone(),
            weight,
        })
        .collect();
    Ok((samples, n_eff, fit.gamma, warning))
}

/// `N_eff ≥ t` up to round-off: equal weights give `(Σw)²/Σw²` a few ulps
/// below the pool size.
fn reaches(n_eff: f64, t: usize) -> bool {
    n_eff >= t as f64 * (1.0 - 1e-9)
}

/// Draws batches of `t = min(cap, |held|)` graphs, refitting the weights on
/// the whole pool after each batch, until `N_eff ≥ t` or the batch cap.
/// Batch `b` uses stream indices `b·t .. (b+1)·t`, so the pool is a prefix
/// of one fixed stream.
pub fn generate_until_neff(
    source: &dyn GraphSource,
    registry: &PropertyRegistry,
    split_property: usize,
    held_z: &[f64],
    kmm: &KmmConfig,
    target: &NeffTarget,
) -> Result<GeneratedPool> {
    target.validate()?;
    if held_z.is_empty() {
        return Err(Error::DegenerateSample("held split is empty".into()));
    }
    registry.check_index(split_property)?;
    let t = target.threshold(held_z.len());
    let mut pool = PropertyMatrix {
        registry: registry.clone(),
        rows: Vec::new(),
    };
    let mut batches = 0;
    loop {
        let graphs = source.sample_range(batches * t..(batches + 1) * t)?;
        pool.rows
            .extend(PropertyMatrix::compute(&graphs, registry)?.rows);
        batches += 1;
        let (samples, n_eff, gamma, kmm_warning) =
            weight_samples(&pool, split_property, held_z, kmm)?;
        let reached = reaches(n_eff, t);
        if reached || batches >= target.max_batches {
            let mut warnings: Vec<Warning> = kmm_warning.into_iter().collect();
            for w in &warnings {
                log::warn!("{w}");
            }
            if !reached {
                let stall = Warning::NeffStall {
                    n_eff,
                    target: t,
                    batches,
                };
                log::warn!("{stall}");
                warnings.push(stall);
            }
            return Ok(GeneratedPool {
                samples,
                n_eff,
                batches,
                target: t,
                reached,
                gamma,
                warnings,
            });
        }
    }
}

/// Manifest shipped next to an imported sample file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    /// [`split_hash`] of the training graphs the model was fitted on.
    pub train_split_hash: String,
    #[serde(default)]
    pub model: Option<String>,
}

/// SHA-256 (hex) of the sorted graph ids joined by newlines.
pub fn split_hash<'a>(ids: impl IntoIterator<Item = &'a str>) -> String {
    let mut ids: Vec<&str> = ids.into_iter().collect();
    ids.sort_unstable();
    hex::encode(Sha256::digest(ids.join("\n").as_bytes()))
}

/// Reads an imported sample file and its manifest, refusing it if the
/// manifest was produced for a different training split.
pub fn load_imported(samples: &Path, manifest: &Path, expected_hash: &str) -> Result<Vec<Graph>> {
    let manifest: SampleManifest = serde_json::from_str(&fs::read_to_string(manifest)?)?;
    if manifest.train_split_hash != expected_hash {
        return Err(Error::ManifestMismatch {
            expected: expected_hash.to_string(),
            found: manifest.train_split_hash,
        });
    }
    read_jsonl(samples)
}

/// Single weighting pass over a fixed imported sample set.
pub fn weigh_imported(
    graphs: &[Graph],
    registry: &PropertyRegistry,
    split_property: usize,
    held_z: &[f64],
    kmm: &KmmConfig,
    target: &NeffTarget,
) -> Result<GeneratedPool> {
    if graphs.is_empty() {
        return Err(Error::EmptyTest);
    }
    let t = target.threshold(held_z.len());
    let props = PropertyMatrix::compute(graphs, registry)?;
    let (samples, n_eff, gamma, kmm_warning) = weight_samples(&props, split_property, held_z, kmm)?;
    let reached = reaches(n_eff, t);
    let mut warnings: Vec<Warning> = kmm_warning.into_iter().collect();
    if !reached {
        warnings.push(Warning::NeffStall {
            n_eff,
            target: t,
            batches: 1,
        });
    }
    Ok(GeneratedPool {
        samples,
        n_eff,
        batches: 1,
        target: t,
        reached,
        gamma,
        warnings,
    })
}
