//! Ground-truth graph families and reference generators with known
//! behaviour, for checking that an evaluation ranks models correctly.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::keyed_rng;

/// `G(n, p)` parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErConfig {
    pub num_nodes: usize,
    pub edge_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Two equal communities of `c` nodes each, `c` uniform on the inclusive
/// range; each block is `G(c, intra_prob)` and each cross pair is linked
/// independently with probability `0.1 / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommConfig {
    pub nodes_per_community: (usize, usize),
    pub intra_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ErConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes < 1 {
            return Err(Error::Config("ER graphs need at least one node".into()));
        }
        check_prob(self.edge_prob)
    }
}

impl CommConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.nodes_per_community;
        if lo < 2 || hi < lo {
            return Err(Error::Config(format!(
                "invalid community size range [{lo}, {hi}]"
            )));
        }
        check_prob(self.intra_prob)
    }

    pub fn cross_prob(community_size: usize) -> f64 {
        (0.1 / community_size as f64).min(1.0)
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "edge probability {p} outside [0, 1]"
        )))
    }
}

pub fn gen_er(cfg: &ErConfig, count: usize) -> Result<Vec<Graph>> {
    gen_er_range(cfg, 0..count, "er")
}

pub fn gen_comm(cfg: &CommConfig, count: usize) -> Result<Vec<Graph>> {
    gen_comm_range(cfg, 0..count, "comm")
}

/// Samples for stream indices `range`; sample `i` is the same graph no
/// matter which range it is drawn in.
pub fn gen_er_range(cfg: &ErConfig, range: Range<usize>, prefix: &str) -> Result<Vec<Graph>> {
    cfg.validate()?;
    Ok(range
        .into_par_iter()
        .map(|i| {
            let mut rng = keyed_rng(cfg.seed, i as u64);
            let n = cfg.num_nodes;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(cfg.edge_prob) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_canonical(format!("{prefix}-{i}"), n, edges)
        })
        .collect())
}

pub fn gen_comm_range(cfg: &CommConfig, range: Range<usize>, prefix: &str) -> Result<Vec<Graph>> {
    cfg.validate()?;
    let (lo, hi) = cfg.nodes_per_community;
    Ok(range
        .into_par_iter()
        .map(|i| {
            let mut rng = keyed_rng(cfg.seed, i as u64);
            let c = rng.random_range(lo..=hi);
            let cross = CommConfig::cross_prob(c);
            let mut edges = Vec::new();
            for u in 0..2 * c {
                for v in u + 1..2 * c {
                    let p = if (u < c) == (v < c) {
                        cfg.intra_prob
                    } else {
                        cross
                    };
                    if rng.random_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_canonical(format!("{prefix}-{i}"), 2 * c, edges)
        })
        .collect())
}

/// Ground-truth family a distributional model samples from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum GroundTruth {
    Er(ErConfig),
    Comm(CommConfig),
}

impl GroundTruth {
    pub fn edge_prob(&self) -> f64 {
        match self {
            GroundTruth::Er(c) => c.edge_prob,
            GroundTruth::Comm(c) => c.intra_prob,
        }
    }

    /// Same family with the (intra-community) edge probability replaced.
    pub fn with_edge_prob(&self, p: f64) -> Self {
        match *self {
            GroundTruth::Er(c) => GroundTruth::Er(ErConfig { edge_prob: p, ..c }),
            GroundTruth::Comm(c) => GroundTruth::Comm(CommConfig { intra_prob: p, ..c }),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match *self {
            GroundTruth::Er(c) => GroundTruth::Er(ErConfig { seed, ..c }),
            GroundTruth::Comm(c) => GroundTruth::Comm(CommConfig { seed, ..c }),
        }
    }

    pub fn sample_range(&self, range: Range<usize>, prefix: &str) -> Result<Vec<Graph>> {
        match self {
            GroundTruth::Er(c) => gen_er_range(c, range, prefix),
            GroundTruth::Comm(c) => gen_comm_range(c, range, prefix),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Bootstraps the training graphs.
    ExactMemo,
    /// Bootstraps and toggles one uniformly chosen node pair.
    ApproxMemo,
    /// Samples the ground truth.
    Oracle,
    /// Ground truth with edge probability lowered by 0.05.
    Close,
    /// Ground truth with edge probability lowered by 0.1.
    Far,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::ExactMemo,
        ModelKind::ApproxMemo,
        ModelKind::Oracle,
        ModelKind::Close,
        ModelKind::Far,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ExactMemo => "exact_memo",
            ModelKind::ApproxMemo => "approx_memo",
            ModelKind::Oracle => "oracle",
            ModelKind::Close => "close",
            ModelKind::Far => "far",
        }
    }

    pub fn is_memo(self) -> bool {
        matches!(self, ModelKind::ExactMemo | ModelKind::ApproxMemo)
    }

    /// Edge-probability offset from the ground truth.
    pub fn edge_prob_offset(self) -> f64 {
        match self {
            ModelKind::Close => -0.05,
            ModelKind::Far => -0.1,
            _ => 0.0,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace(['.', '-'], "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .or(match s.as_str() {
                "e_memo" | "emem" => Some(ModelKind::ExactMemo),
                "a_memo" => Some(ModelKind::ApproxMemo),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown model kind `{s}`")))
    }
}

/// One of the five reference generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    pub kind: ModelKind,
    pub training_set: Vec<Graph>,
    /// For distributional kinds, already carrying the kind's edge probability.
    pub ground_truth_config: Option<GroundTruth>,
    pub seed: u64,
}

impl ReferenceModel {
    /// Builds `kind` from a training set and the true family. Memo kinds
    /// keep the training set; the others shift the family's edge
    /// probability by the kind's offset and ignore the training set.
    pub fn new(
        kind: ModelKind,
        training_set: &[Graph],
        truth: &GroundTruth,
        seed: u64,
    ) -> Result<Self> {
        let model = if kind.is_memo() {
            Self {
                kind,
                training_set: training_set.to_vec(),
                ground_truth_config: None,
                seed,
            }
        } else {
            let p = (truth.edge_prob() + kind.edge_prob_offset()).clamp(0.0, 1.0);
            Self {
                kind,
                training_set: Vec::new(),
                ground_truth_config: Some(truth.with_edge_prob(p)),
                seed,
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_memo() && self.training_set.is_empty() {
            return Err(Error::Config(format!(
                "{} needs a non-empty training set",
                self.kind
            )));
        }
        if !self.kind.is_memo() && self.ground_truth_config.is_none() {
            return Err(Error::Config(format!(
                "{} needs a ground-truth config",
                self.kind
            )));
        }
        Ok(())
    }

    /// Samples for stream indices `range`.
    pub fn sample_range(&self, range: Range<usize>) -> Result<Vec<Graph>> {
        self.validate()?;
        let prefix = self.kind.name();
        match self.kind {
            ModelKind::ExactMemo | ModelKind::ApproxMemo => Ok(range
                .into_par_iter()
                .map(|i| {
                    let mut rng = keyed_rng(self.seed, i as u64);
                    let src = &self.training_set[rng.random_range(0..self.training_set.len())];
                    if self.kind == ModelKind::ExactMemo {
                        src.with_id(format!("{}~{prefix}-{i}", src.id()))
                    } else {
                        toggle_random_pair(src, &mut rng, format!("{}~{prefix}-{i}", src.id()))
                    }
                })
                .collect()),
            _ => {
                let truth = self.ground_truth_config.expect("validated");
                truth.with_seed(self.seed).sample_range(range, prefix)
            }
        }
    }
}

pub fn sample_model(model: &ReferenceModel, count: usize) -> Result<Vec<Graph>> {
    model.sample_range(0..count)
}

fn toggle_random_pair(g: &Graph, rng: &mut ChaCha8Rng, id: String) -> Graph {
    let n = g.num_nodes();
    if n < 2 {
        return g.with_id(id);
    }
    // uniform unordered pair
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    g.with_toggled(id, u, v)
}
