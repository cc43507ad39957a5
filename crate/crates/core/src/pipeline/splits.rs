use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PropertyMatrix;
use crate::projection::{EcdfModel, UnitProjection};
use crate::splitter::{assign_splits, SplitAssignment, SplitConfig};

/// Reseeds tried after an empty split, `seed+1 ..= seed+MAX_RESEEDS`.
pub const MAX_RESEEDS: u64 = 5;

/// Projection and assignment of one split of a property column.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySplit {
    pub projection: UnitProjection,
    pub assignment: SplitAssignment,
}

/// Projects `values` onto the unit interval with an ECDF fitted on the
/// same values, then assigns labels. An empty split is retried with seeds
/// `seed+1 ..= seed+5`; the seed that succeeded is in `assignment.config`.
pub fn split_values(values: &[f64], cfg: &SplitConfig) -> Result<PropertySplit> {
    let projection = EcdfModel::fit(values)?.project(values, Default::default())?;
    let mut last_err = None;
    for attempt in 0..=MAX_RESEEDS {
        let cfg = cfg.with_seed(cfg.seed.wrapping_add(attempt));
        match assign_splits(&projection, &cfg) {
            Ok(assignment) => {
                if attempt > 0 {
                    log::info!("split succeeded after {attempt} reseed(s)");
                }
                return Ok(PropertySplit {
                    projection,
                    assignment,
                });
            }
            Err(e @ Error::EmptySplit { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

pub fn split_property(props: &PropertyMatrix, cfg: &SplitConfig) -> Result<PropertySplit> {
    props.registry.check_index(cfg.split_property)?;
    split_values(&props.column(cfg.split_property), cfg)
}

/// Row positions of the three parts of a nested split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedSplit {
    pub v_train: Vec<usize>,
    pub v_val: Vec<usize>,
    pub v_test: Vec<usize>,
    /// Outer split configuration actually used (after any reseed).
    pub outer: SplitConfig,
    pub inner: SplitConfig,
}

impl NestedSplit {
    /// `v_train ∪ v_val`, the outer training side, in dataset order.
    pub fn train(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.v_train.iter().chain(&self.v_val).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Outer split holding out `outer_held`, then a fresh ECDF fit and inner
/// split of the remainder holding out `inner_held`.
pub fn nested_split(
    props: &PropertyMatrix,
    outer: &SplitConfig,
    outer_held: usize,
    inner: &SplitConfig,
    inner_held: usize,
) -> Result<NestedSplit> {
    if inner.k >= outer.k {
        return Err(Error::Config(format!(
            "inner k ({}) must be smaller than outer k ({})",
            inner.k, outer.k
        )));
    }
    if !(1..=outer.k).contains(&outer_held) || !(1..=inner.k).contains(&inner_held) {
        return Err(Error::Config("held split index out of range".into()));
    }
    if props.len() < 10 * outer.k {
        return Err(Error::Config(format!(
            "nested split needs at least {} graphs, got {}",
            10 * outer.k,
            props.len()
        )));
    }
    let outer_split = split_property(props, outer)?;
    let v_test = outer_split.assignment.held(outer_held);
    let remainder = outer_split.assignment.train(outer_held);

    let inner_split = split_property(&props.select(&remainder), inner)?;
    let (mut v_train, mut v_val) = (Vec::new(), Vec::new());
    for (pos, &label) in inner_split.assignment.labels.iter().enumerate() {
        if label == inner_held {
            v_val.push(remainder[pos]);
        } else {
            v_train.push(remainder[pos]);
        }
    }
    Ok(NestedSplit {
        v_train,
        v_val,
        v_test,
        outer: outer_split.assignment.config,
        inner: inner_split.assignment.config,
    })
}

/// Standard random k-fold assignment (`ψ = 1`, `ε = 1`).
pub fn horizontal_baseline(props: &PropertyMatrix, k: usize, seed: u64) -> Result<SplitAssignment> {
    if props.len() < k {
        return Err(Error::Config(format!(
            "need at least {k} graphs for {k} splits"
        )));
    }
    let cfg = SplitConfig::horizontal(k, 0, seed)?;
    Ok(split_property(props, &cfg)?.assignment)
}
