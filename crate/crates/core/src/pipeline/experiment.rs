use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, PropertyMatrix};
use crate::metrics::held_and_generated;
use crate::projection::UnitProjection;
use crate::rng::derive_seed;
use crate::splitter::SplitConfig;
use crate::synthetic::{ModelKind, ReferenceModel};
use crate::weights::write_weights_csv;

use super::config::{seed_label, ExperimentConfig, ModelSpec};
use super::evaluate::{evaluate_all_tests, CellRecord};
use super::report::{EvalReport, Provenance};
use super::sampling::{
    generate_until_neff, load_imported, split_hash, weigh_imported, GeneratedPool, Warning,
};
use super::splits::{nested_split, split_property, NestedSplit, PropertySplit};

/// Dataset graphs with their property rows and the resolved split property.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graphs: Vec<Graph>,
    pub props: PropertyMatrix,
    pub split_property: usize,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let graphs = cfg.dataset.load(cfg.seed)?;
    let props = PropertyMatrix::compute(&graphs, &cfg.properties)?;
    let split_property = cfg.split.split_property.resolve(&props)?;
    Ok(Prepared {
        graphs,
        props,
        split_property,
    })
}

pub fn provenance(cfg: &ExperimentConfig) -> Result<Provenance> {
    Ok(Provenance {
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Weighted generated pool for one (training side, held side) pair.
/// `cell` names the imported sample file; `seed` seeds reference models.
#[allow(clippy::too_many_arguments)]
pub fn model_pool(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    train: &[Graph],
    held: &PropertyMatrix,
    split_property: usize,
    cell: (usize, usize),
    seed: u64,
) -> Result<GeneratedPool> {
    let held_z = held.column(split_property);
    match spec {
        ModelSpec::Reference { kind, ground_truth } => {
            let truth = ground_truth
                .or(cfg.dataset.truth())
                .ok_or_else(|| Error::Config(format!("model {kind} needs a ground_truth")))?;
            let model = ReferenceModel::new(*kind, train, &truth, seed)?;
            generate_until_neff(
                &model,
                &cfg.properties,
                split_property,
                &held_z,
                &cfg.kmm,
                &cfg.n_eff,
            )
        }
        ModelSpec::Imported { dir, .. } => {
            let (samples, manifest) = ModelSpec::imported_paths(dir, cell.0, cell.1);
            let hash = split_hash(train.iter().map(|g| g.id()));
            let graphs = load_imported(&samples, &manifest, &hash)?;
            weigh_imported(
                &graphs,
                &cfg.properties,
                split_property,
                &held_z,
                &cfg.kmm,
                &cfg.n_eff,
            )
        }
    }
}

fn pick(graphs: &[Graph], positions: &[usize]) -> Vec<Graph> {
    positions.iter().map(|&i| graphs[i].clone()).collect()
}

fn model_label(spec: &ModelSpec, position: usize) -> u64 {
    match spec {
        ModelSpec::Reference { kind, .. } => {
            ModelKind::ALL.iter().position(|k| k == kind).unwrap_or(0) as u64
        }
        ModelSpec::Imported { .. } => 100 + position as u64,
    }
}

/// Which side pair a validation score compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    /// Train on `v_train ∪ v_val`, score on `v_test`.
    #[serde(rename = "v-test")]
    VTest,
    /// Train on `v_train`, score on `v_val`.
    #[serde(rename = "v-val")]
    VVal,
    /// Horizontal counterpart of `v-test`.
    #[serde(rename = "h-test")]
    HTest,
    /// Horizontal counterpart of `v-val`.
    #[serde(rename = "h-val")]
    HVal,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::VTest => "v-test",
            Setting::VVal => "v-val",
            Setting::HTest => "h-test",
            Setting::HVal => "h-val",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    pub setting: Setting,
    pub model: String,
    pub train_size: usize,
    pub held_size: usize,
    /// Mean KS over all test properties.
    pub mean_ks: f64,
    pub cells: Vec<CellRecord>,
}

impl SettingResult {
    pub fn warnings(&self) -> impl Iterator<Item = &Warning> {
        self.cells.iter().take(1).flat_map(|c| c.warnings.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub properties: Vec<String>,
    pub split_property: usize,
    pub vertical: NestedSplit,
    pub horizontal: NestedSplit,
    /// Ordered by setting, then by configured model order.
    pub results: Vec<SettingResult>,
    pub provenance: Provenance,
}

impl ValidationReport {
    pub fn mean_ks(&self, setting: Setting, model: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.setting == setting && r.model == model)
            .map(|r| r.mean_ks)
    }

    pub fn has_neff_stall(&self) -> bool {
        self.results
            .iter()
            .any(|r| r.warnings().any(Warning::is_neff_stall))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `setting,model,train_size,held_size,mean_ks` rows.
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "setting",
            "model",
            "train_size",
            "held_size",
            "mean_ks",
            "n_eff",
            "n_generated",
        ])?;
        for r in &self.results {
            let (n_eff, n_gen) = r
                .cells
                .first()
                .map(|c| (c.n_eff, c.n_generated))
                .unwrap_or((0.0, 0));
            out.write_record([
                r.setting.name().to_string(),
                r.model.clone(),
                r.train_size.to_string(),
                r.held_size.to_string(),
                r.mean_ks.to_string(),
                n_eff.to_string(),
                n_gen.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Side pairs `(train, held)` for a nested split and a setting.
fn sides(split: &NestedSplit, setting: Setting) -> (Vec<usize>, Vec<usize>) {
    match setting {
        Setting::VTest | Setting::HTest => (split.train(), split.v_test.clone()),
        Setting::VVal | Setting::HVal => (split.v_train.clone(), split.v_val.clone()),
    }
}

/// Nested vertical and horizontal validation of every configured model.
/// Memo models memorize exactly the training side of the pair being
/// scored. Requires `inner_split`.
pub fn run_validation(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    let inner = cfg
        .inner_split
        .as_ref()
        .ok_or_else(|| Error::Config("nested validation needs an inner_split".into()))?;
    if cfg
        .models
        .iter()
        .any(|m| matches!(m, ModelSpec::Imported { .. }))
    {
        return Err(Error::Config(
            "imported samples are evaluated per cell; use the matrix or single-cell mode".into(),
        ));
    }
    cfg.validate_models()?;
    let prep = prepare(cfg)?;
    let l = prep.split_property;
    let outer_held = cfg.outer_held();
    let inner_held = inner.held.unwrap_or(inner.k);

    let outer_cfg = SplitConfig::new(
        cfg.split.k,
        cfg.split.psi,
        cfg.split.epsilon,
        l,
        derive_seed(cfg.seed, &[seed_label::OUTER_SPLIT]),
    )?;
    let inner_cfg = SplitConfig::new(
        inner.k,
        inner.psi,
        inner.epsilon,
        l,
        derive_seed(cfg.seed, &[seed_label::INNER_SPLIT]),
    )?;
    let vertical = nested_split(&prep.props, &outer_cfg, outer_held, &inner_cfg, inner_held)?;
    let h_outer = SplitConfig::horizontal(
        cfg.split.k,
        l,
        derive_seed(cfg.seed, &[seed_label::HORIZONTAL, 0]),
    )?;
    let h_inner = SplitConfig::horizontal(
        inner.k,
        l,
        derive_seed(cfg.seed, &[seed_label::HORIZONTAL, 1]),
    )?;
    let horizontal = nested_split(&prep.props, &h_outer, outer_held, &h_inner, inner_held)?;

    let settings = [Setting::VTest, Setting::VVal, Setting::HTest, Setting::HVal];
    let jobs: Vec<(usize, Setting, usize, &ModelSpec)> = settings
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| {
            cfg.models
                .iter()
                .enumerate()
                .map(move |(mi, m)| (si, s, mi, m))
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(si, setting, mi, spec)| {
            let split = if matches!(setting, Setting::VTest | Setting::VVal) {
                &vertical
            } else {
                &horizontal
            };
            let (train_pos, held_pos) = sides(split, setting);
            let train = pick(&prep.graphs, &train_pos);
            let held = prep.props.select(&held_pos);
            let seed = derive_seed(
                cfg.seed,
                &[seed_label::MODEL, si as u64, model_label(spec, mi)],
            );
            let pool = model_pool(cfg, spec, &train, &held, l, (l, outer_held), seed)?;
            let cells = evaluate_all_tests(&held, &pool, l, outer_held, &cfg.metrics)?;
            let mean_ks = cells.iter().map(|c| c.ks).sum::<f64>() / cells.len().max(1) as f64;
            if cfg.dump_intermediates {
                if let Some(dir) = &cfg.output_dir {
                    let tag = format!("{}-{}", setting.name(), spec.name());
                    dump_pool(dir, &tag, &held, &pool, l, None)?;
                }
            }
            Ok(SettingResult {
                setting,
                model: spec.name(),
                train_size: train_pos.len(),
                held_size: held_pos.len(),
                mean_ks,
                cells,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ValidationReport {
        properties: cfg.properties.names(),
        split_property: l,
        vertical,
        horizontal,
        results,
        provenance: provenance(cfg)?,
    })
}

/// One held split `j` of the split on property `l`: cells for every test
/// property, for one model.
fn matrix_job(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    spec: &ModelSpec,
    l: usize,
    j: usize,
    labels: &[usize],
    projection: &UnitProjection,
) -> Result<Vec<CellRecord>> {
    let held_pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == j).collect();
    let train_pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != j).collect();
    let train = pick(&prep.graphs, &train_pos);
    let held = prep.props.select(&held_pos);
    let seed = derive_seed(cfg.seed, &[seed_label::MATRIX_CELL, l as u64, j as u64]);
    let pool = model_pool(cfg, spec, &train, &held, l, (l, j), seed)?;
    if cfg.dump_intermediates {
        if let Some(dir) = &cfg.output_dir {
            let tag = format!("{}-l{l}-j{j}", spec.name());
            dump_pool(dir, &tag, &held, &pool, l, Some(projection))?;
        }
    }
    evaluate_all_tests(&held, &pool, l, j, &cfg.metrics)
}

/// Splits for every property, seeded by `(global seed, ℓ)`.
fn matrix_splits(
    cfg: &ExperimentConfig,
    prep: &Prepared,
) -> Result<Vec<(Vec<usize>, UnitProjection)>> {
    (0..prep.props.num_properties())
        .map(|l| {
            let split_cfg = SplitConfig::new(
                cfg.split.k,
                cfg.split.psi,
                cfg.split.epsilon,
                l,
                derive_seed(cfg.seed, &[seed_label::MATRIX_SPLIT, l as u64]),
            )?;
            let s = split_property(&prep.props, &split_cfg)?;
            Ok((s.assignment.labels, s.projection))
        })
        .collect()
}

/// Every `(ℓ, j, ℓ′)` cell with `ℓ′ ≠ ℓ` for each configured model; one
/// report per model.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<Vec<EvalReport>> {
    cfg.validate_models()?;
    let prep = prepare(cfg)?;
    let m = prep.props.num_properties();
    if m < 2 {
        return Err(Error::Config(
            "the matrix needs at least two properties".into(),
        ));
    }
    let splits = matrix_splits(cfg, &prep)?;
    let jobs: Vec<(usize, usize)> = (0..m)
        .flat_map(|l| (1..=cfg.split.k).map(move |j| (l, j)))
        .collect();
    let prov = provenance(cfg)?;
    cfg.models
        .iter()
        .map(|spec| {
            let cells: Vec<CellRecord> = jobs
                .par_iter()
                .map(|&(l, j)| matrix_job(cfg, &prep, spec, l, j, &splits[l].0, &splits[l].1))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            EvalReport::new(
                spec.name(),
                cfg.split.k,
                cfg.properties.names(),
                cells,
                prov.clone(),
            )
        })
        .collect()
}

/// Outer split on the resolved split property, seeded as the matching
/// matrix row.
pub fn configured_split(cfg: &ExperimentConfig, prep: &Prepared) -> Result<PropertySplit> {
    let l = prep.split_property;
    let split_cfg = SplitConfig::new(
        cfg.split.k,
        cfg.split.psi,
        cfg.split.epsilon,
        l,
        derive_seed(cfg.seed, &[seed_label::MATRIX_SPLIT, l as u64]),
    )?;
    split_property(&prep.props, &split_cfg)
}

/// The configured split property and held split only; one report per model.
pub fn run_single_cell(cfg: &ExperimentConfig) -> Result<Vec<EvalReport>> {
    cfg.validate_models()?;
    let prep = prepare(cfg)?;
    let l = prep.split_property;
    let j = cfg.outer_held();
    let s = configured_split(cfg, &prep)?;
    let prov = provenance(cfg)?;
    cfg.models
        .iter()
        .map(|spec| {
            let cells = matrix_job(cfg, &prep, spec, l, j, &s.assignment.labels, &s.projection)?;
            EvalReport::new(
                spec.name(),
                cfg.split.k,
                cfg.properties.names(),
                cells,
                prov.clone(),
            )
        })
        .collect()
}

/// Projections as JSON, weights as CSV and weighted ECDF curves per test
/// property as CSV, under `<dir>/intermediates/<tag>.*`.
pub fn dump_pool(
    dir: &Path,
    tag: &str,
    held: &PropertyMatrix,
    pool: &GeneratedPool,
    split_property: usize,
    projection: Option<&UnitProjection>,
) -> Result<()> {
    let dir = dir.join("intermediates");
    fs::create_dir_all(&dir)?;
    if let Some(p) = projection {
        fs::write(
            dir.join(format!("{tag}.projection.json")),
            serde_json::to_string(p)?,
        )?;
    }
    write_weights_csv(
        BufWriter::new(File::create(dir.join(format!("{tag}.weights.csv")))?),
        &pool.samples,
    )?;
    let mut out = csv::Writer::from_path(dir.join(format!("{tag}.ecdf.csv")))?;
    out.write_record(["test_property", "source", "value", "cdf"])?;
    for t in (0..held.num_properties()).filter(|&t| t != split_property) {
        let name = held.registry.kinds()[t].name();
        let (h, g) = held_and_generated(held, &pool.samples, t)?;
        for (source, emp) in [("held", &h), ("generated", &g)] {
            let mut values = emp.values().to_vec();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for v in values {
                out.write_record([name, source, &v.to_string(), &emp.cdf(v).to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
