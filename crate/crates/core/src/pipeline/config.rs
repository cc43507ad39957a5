use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{read_jsonl, Graph, PropertyKind, PropertyMatrix, PropertyRegistry};
use crate::metrics::Metric;
use crate::rng::derive_seed;
use crate::splitter::SplitConfig;
use crate::synthetic::{ErConfig, GroundTruth, ModelKind};
use crate::weights::KmmConfig;

use super::sampling::NeffTarget;
use super::select::select_split_property;

/// Labels mixed into the global seed for each consumer.
pub(crate) mod seed_label {
    pub const DATASET: u64 = 1;
    pub const OUTER_SPLIT: u64 = 2;
    pub const INNER_SPLIT: u64 = 3;
    pub const MODEL: u64 = 4;
    pub const HORIZONTAL: u64 = 5;
    pub const MATRIX_SPLIT: u64 = 6;
    pub const MATRIX_CELL: u64 = 7;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    /// JSONL graph file.
    File(PathBuf),
    /// `count` graphs from `truth`; the family's own seed is replaced by one
    /// derived from the global seed.
    Synthetic { truth: GroundTruth, count: usize },
}

impl DatasetSpec {
    pub fn load(&self, global_seed: u64) -> Result<Vec<Graph>> {
        match self {
            DatasetSpec::File(path) => read_jsonl(path),
            DatasetSpec::Synthetic { truth, count } => {
                let seed = derive_seed(global_seed, &[seed_label::DATASET]);
                truth.with_seed(seed).sample_range(0..*count, "data")
            }
        }
    }

    pub fn truth(&self) -> Option<GroundTruth> {
        match self {
            DatasetSpec::Synthetic { truth, .. } => Some(*truth),
            DatasetSpec::File(_) => None,
        }
    }
}

/// A property given by index, by name, or `"auto"` for the
/// correlation-based choice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyRef {
    Index(usize),
    Name(String),
}

impl PropertyRef {
    pub fn resolve(&self, props: &PropertyMatrix) -> Result<usize> {
        match self {
            PropertyRef::Index(i) => {
                props.registry.check_index(*i)?;
                Ok(*i)
            }
            PropertyRef::Name(s) if s == "auto" => Ok(select_split_property(props)?.index),
            PropertyRef::Name(s) => {
                let kind: PropertyKind = s.parse()?;
                props
                    .registry
                    .index_of(kind)
                    .ok_or_else(|| Error::Config(format!("property `{s}` is not registered")))
            }
        }
    }
}

impl std::str::FromStr for PropertyRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<usize>() {
            Ok(i) => PropertyRef::Index(i),
            Err(_) => PropertyRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterSplitSpec {
    pub k: usize,
    pub psi: usize,
    pub epsilon: f64,
    pub split_property: PropertyRef,
    /// 1-based held split; defaults to `k`.
    #[serde(default)]
    pub held: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSplitSpec {
    pub k: usize,
    pub psi: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub held: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    /// Built-in reference generator. Distributional kinds use
    /// `ground_truth`, falling back to the synthetic dataset's family.
    Reference {
        kind: ModelKind,
        #[serde(default)]
        ground_truth: Option<GroundTruth>,
    },
    /// Pre-generated samples: `<dir>/cell-l{ℓ}-j{j}.jsonl` with a
    /// `.manifest.json` sibling.
    Imported { dir: PathBuf, name: String },
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Reference { kind, .. } => kind.name().to_string(),
            ModelSpec::Imported { name, .. } => name.clone(),
        }
    }

    pub fn imported_paths(
        dir: &Path,
        split_property: usize,
        split_index: usize,
    ) -> (PathBuf, PathBuf) {
        let stem = format!("cell-l{split_property}-j{split_index}");
        (
            dir.join(format!("{stem}.jsonl")),
            dir.join(format!("{stem}.manifest.json")),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "PropertyRegistry::synthetic")]
    pub properties: PropertyRegistry,
    pub split: OuterSplitSpec,
    #[serde(default)]
    pub inner_split: Option<InnerSplitSpec>,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub n_eff: NeffTarget,
    #[serde(default)]
    pub kmm: KmmConfig,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dump_intermediates: bool,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Ks]
}

impl ExperimentConfig {
    /// The synthetic ER setup: 500 `G(20, 0.5)` graphs, triangle-count
    /// split with `k = 5` then `k = 4`, `ψ = 10`, `ε = 0.01`, last split
    /// held at both levels, all five reference models.
    pub fn er_validation(seed: u64) -> Self {
        Self::synthetic_validation(
            GroundTruth::Er(ErConfig {
                num_nodes: 20,
                edge_prob: 0.5,
                seed: 0,
            }),
            seed,
        )
    }

    pub fn synthetic_validation(truth: GroundTruth, seed: u64) -> Self {
        Self {
            dataset: DatasetSpec::Synthetic { truth, count: 500 },
            properties: PropertyRegistry::synthetic(),
            split: OuterSplitSpec {
                k: 5,
                psi: 10,
                epsilon: 0.01,
                split_property: PropertyRef::Name("triangle_count".into()),
                held: None,
            },
            inner_split: Some(InnerSplitSpec {
                k: 4,
                psi: 10,
                epsilon: 0.01,
                held: None,
            }),
            models: ModelKind::ALL
                .into_iter()
                .map(|kind| ModelSpec::Reference {
                    kind,
                    ground_truth: None,
                })
                .collect(),
            n_eff: NeffTarget::default(),
            kmm: KmmConfig::default(),
            metrics: default_metrics(),
            output_dir: None,
            seed,
            dump_intermediates: false,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let held = self.split.held.unwrap_or(self.split.k);
        SplitConfig::new(self.split.k, self.split.psi, self.split.epsilon, 0, 0)?;
        if !(1..=self.split.k).contains(&held) {
            return Err(Error::Config(format!(
                "held split {held} outside 1..={}",
                self.split.k
            )));
        }
        if let Some(inner) = &self.inner_split {
            SplitConfig::new(inner.k, inner.psi, inner.epsilon, 0, 0)?;
            if inner.k >= self.split.k {
                return Err(Error::Config(format!(
                    "inner k ({}) must be smaller than outer k ({})",
                    inner.k, self.split.k
                )));
            }
            let inner_held = inner.held.unwrap_or(inner.k);
            if !(1..=inner.k).contains(&inner_held) {
                return Err(Error::Config(format!(
                    "inner held split {inner_held} outside 1..={}",
                    inner.k
                )));
            }
        }
        if let DatasetSpec::Synthetic { count: 0, .. } = self.dataset {
            return Err(Error::Config(
                "synthetic dataset count must be positive".into(),
            ));
        }
        self.n_eff.validate()?;
        self.kmm.validate()?;
        Ok(())
    }

    /// Checks that every model can be built; needed only by runs that
    /// sample.
    pub fn validate_models(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        for m in &self.models {
            if let ModelSpec::Reference {
                kind,
                ground_truth: None,
            } = m
            {
                if !kind.is_memo() && self.dataset.truth().is_none() {
                    return Err(Error::Config(format!(
                        "model {kind} needs a ground_truth when the dataset is a file"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn outer_held(&self) -> usize {
        self.split.held.unwrap_or(self.split.k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the compact JSON encoding, with the output location and
    /// dump flag cleared since neither changes any result.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        canonical.dump_intermediates = false;
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&canonical)?)))
    }
}
