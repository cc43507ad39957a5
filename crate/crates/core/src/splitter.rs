//! Biased k-way splits driven by the rank of one property.
//!
//! Conditional on its split `j`, a unit coordinate `u` follows
//! `(1-ε)·BetaMix_j(u) + ε`, where `BetaMix_j` averages the `ψ` adjacent
//! Beta densities `Beta(α, ψk+1-α)` for `α = (j-1)ψ+1 ..= jψ`. The `ψk`
//! components together average to the uniform density, so with equal split
//! priors `1/k` the marginal of `u` stays uniform while the split label
//! depends on `u` whenever `ε < 1`. Larger `ψ` sharpens the splits towards
//! quantile bins; `ε = 1` is ordinary random assignment.

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::projection::UnitProjection;
use crate::rng::keyed_rng;

const U_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Number of splits, at least 2.
    pub k: usize,
    /// Sharpness: adjacent Beta components per split, at least 1.
    pub psi: usize,
    /// Uniform mixing weight in `[0, 1]`.
    pub epsilon: f64,
    /// Index of the property whose rank drives the split.
    pub split_property: usize,
    pub seed: u64,
}

impl SplitConfig {
    pub fn new(
        k: usize,
        psi: usize,
        epsilon: f64,
        split_property: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            k,
            psi,
            epsilon,
            split_property,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ordinary random k-fold assignment (`ψ = 1`, `ε = 1`).
    pub fn horizontal(k: usize, split_property: usize, seed: u64) -> Result<Self> {
        Self::new(k, 1, 1.0, split_property, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.psi < 1 {
            return Err(Error::Config("psi must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Precomputed Beta-mixture split densities for one `(k, ψ, ε)`.
#[derive(Debug, Clone)]
pub struct SplitKernel {
    k: usize,
    psi: usize,
    epsilon: f64,
    /// `-ln B(α, ψk+1-α)` for `α = 1..=ψk`
    log_norm: Vec<f64>,
}

impl SplitKernel {
    pub fn new(cfg: &SplitConfig) -> Result<Self> {
        cfg.validate()?;
        let total = cfg.k * cfg.psi;
        let log_norm = (1..=total)
            .map(|alpha| {
                let alpha = alpha as f64;
                -ln_beta(alpha, total as f64 + 1.0 - alpha)
            })
            .collect();
        Ok(Self {
            k: cfg.k,
            psi: cfg.psi,
            epsilon: cfg.epsilon,
            log_norm,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `BetaMix_j(u)` for 1-based split `j`, without the uniform mixing.
    pub fn beta_mix_pdf(&self, u: f64, j: usize) -> f64 {
        assert!(
            (1..=self.k).contains(&j),
            "split index {j} outside 1..={}",
            self.k
        );
        let u: f64 = u.clamp(U_CLAMP, 1.0 - U_CLAMP);
        let (ln_u, ln_1mu) = (u.ln(), (-u).ln_1p());
        let total = (self.k * self.psi) as f64;
        let first = (j - 1) * self.psi + 1;
        let sum: f64 = (first..first + self.psi)
            .map(|alpha| {
                let a = alpha as f64;
                (self.log_norm[alpha - 1] + (a - 1.0) * ln_u + (total - a) * ln_1mu).exp()
            })
            .sum();
        sum / self.psi as f64
    }

    /// `p(u | S = j) = (1-ε)·BetaMix_j(u) + ε`.
    pub fn split_density(&self, u: f64, j: usize) -> f64 {
        (1.0 - self.epsilon) * self.beta_mix_pdf(u, j) + self.epsilon
    }

    /// Uniform-prior mixture `Σⱼ p(u|j)/k`; identically 1 in exact arithmetic.
    pub fn marginal_density(&self, u: f64) -> f64 {
        (1..=self.k).map(|j| self.split_density(u, j)).sum::<f64>() / self.k as f64
    }

    /// `p(S = j | u)` for `j = 1..=k`.
    pub fn conditional_probs(&self, u: f64) -> Vec<f64> {
        let pdfs: Vec<f64> = (1..=self.k).map(|j| self.beta_mix_pdf(u, j)).collect();
        let mix = 1.0 - self.epsilon;
        // The exact denominator is k; dividing by the computed sum makes the
        // vector sum to one to rounding and gives exactly 1/k when ε = 1.
        let denom = mix * pdfs.iter().sum::<f64>() + self.epsilon * self.k as f64;
        pdfs.into_iter()
            .map(|p| (mix * p + self.epsilon) / denom)
            .collect()
    }
}

pub fn beta_mix_pdf(u: f64, j: usize, cfg: &SplitConfig) -> Result<f64> {
    Ok(SplitKernel::new(cfg)?.beta_mix_pdf(u, j))
}

pub fn conditional_split_probs(u: f64, cfg: &SplitConfig) -> Result<Vec<f64>> {
    Ok(SplitKernel::new(cfg)?.conditional_probs(u))
}

/// Split labels (1-based) for a projected dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub labels: Vec<usize>,
    pub config: SplitConfig,
    /// Row `i` holds `p(S = j | uᵢ)` for `j = 1..=k`.
    pub conditional_probs: Option<Vec<Vec<f64>>>,
}

impl SplitAssignment {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Positions labelled `j`.
    pub fn held(&self, j: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == j)
            .collect()
    }

    /// Positions not labelled `j`.
    pub fn train(&self, j: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] != j)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.config.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }
}

/// Draws one label per projected point from `p(S | uᵢ)`, using the keyed
/// stream `(seed, i)` for point `i`. Fails if some split ends up empty.
pub fn assign_splits(proj: &UnitProjection, cfg: &SplitConfig) -> Result<SplitAssignment> {
    if proj.is_empty() {
        return Err(Error::EmptyTest);
    }
    let kernel = SplitKernel::new(cfg)?;
    let (labels, probs): (Vec<usize>, Vec<Vec<f64>>) = proj
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let probs = kernel.conditional_probs(u);
            let draw: f64 = keyed_rng(cfg.seed, i as u64).random();
            (categorical(&probs, draw), probs)
        })
        .unzip();
    let assignment = SplitAssignment {
        labels,
        config: *cfg,
        conditional_probs: Some(probs),
    };
    if let Some(pos) = assignment.sizes().iter().position(|&s| s == 0) {
        return Err(Error::EmptySplit { split: pos + 1 });
    }
    Ok(assignment)
}

fn categorical(probs: &[f64], draw: f64) -> usize {
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return j + 1;
        }
    }
    // rounding left the cumulative sum just below 1; take the last split with mass
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
        + 1
}

/// `I(U; S)` by midpoint quadrature on `grid_size` cells:
/// `(1/k) Σⱼ ∫ p(u|j) ln p(u|j) du`, since the marginal of `u` is uniform.
pub fn split_mutual_information(cfg: &SplitConfig, grid_size: usize) -> Result<f64> {
    if grid_size < 100 {
        return Err(Error::Config(format!(
            "grid_size must be at least 100, got {grid_size}"
        )));
    }
    let kernel = SplitKernel::new(cfg)?;
    let h = 1.0 / grid_size as f64;
    let total: f64 = (0..grid_size)
        .into_par_iter()
        .map(|g| {
            let u: f64 = (g as f64 + 0.5) * h;
            (1..=cfg.k)
                .map(|j| {
                    let p = kernel.split_density(u, j);
                    if p > 0.0 {
                        p * p.ln()
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok((total * h / cfg.k as f64).max(0.0))
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitRow {
    graph_id: String,
    label: usize,
    u_value: f64,
}

/// Writes `graph_id,label,u_value` rows.
pub fn write_split_csv(
    w: impl Write,
    graph_ids: &[String],
    assignment: &SplitAssignment,
    proj: &UnitProjection,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for ((id, &label), &u) in graph_ids.iter().zip(&assignment.labels).zip(&proj.values) {
        writer.serialize(SplitRow {
            graph_id: id.clone(),
            label,
            u_value: u,
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads rows written by [`write_split_csv`] as `(graph_id, label, u)`.
pub fn read_split_csv(r: impl Read) -> Result<Vec<(String, usize, f64)>> {
    csv::Reader::from_reader(r)
        .deserialize::<SplitRow>()
        .map(|row| {
            let row = row?;
            Ok((row.graph_id, row.label, row.u_value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, psi: usize, epsilon: f64) -> SplitConfig {
        SplitConfig::new(k, psi, epsilon, 0, 42).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SplitConfig::new(1, 1, 0.0, 0, 0).is_err());
        assert!(SplitConfig::new(2, 0, 0.0, 0, 0).is_err());
        assert!(SplitConfig::new(2, 1, 1.5, 0, 0).is_err());
    }

    #[test]
    fn beta_mix_examples() {
        // Beta(1,5) density 5(1-u)^4
        let near_zero = beta_mix_pdf(1e-9, 1, &cfg(5, 1, 0.0)).unwrap();
        assert!((near_zero - 5.0).abs() < 1e-6);
        for u in [0.1, 0.37, 0.9] {
            let d = beta_mix_pdf(u, 1, &cfg(5, 1, 0.0)).unwrap();
            assert!((d - 5.0 * (1.0 - u).powi(4)).abs() < 1e-12);
        }
        // Beta(1,2) density 2(1-u)
        assert!((beta_mix_pdf(0.5, 1, &cfg(2, 1, 0.0)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beta_mix_matches_closed_form_psi_two() {
        // k=2, ψ=2: split 1 mixes Beta(1,4) and Beta(2,3)
        let c = cfg(2, 2, 0.0);
        for u in [0.05f64, 0.5, 0.77] {
            let b14 = 4.0 * (1.0 - u).powi(3);
            let b23 = 12.0 * u * (1.0 - u).powi(2);
            let got = beta_mix_pdf(u, 1, &c).unwrap();
            assert!((got - 0.5 * (b14 + b23)).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_probs_examples() {
        for u in [0.01, 0.5, 0.99] {
            let p = conditional_split_probs(u, &cfg(5, 3, 1.0)).unwrap();
            assert!(p.iter().all(|&x| x == 0.2));
        }
        let p = conditional_split_probs(0.5, &cfg(2, 1, 0.0)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = conditional_split_probs(0.05, &cfg(5, 1000, 0.0)).unwrap();
        assert!(p[0] >= 0.999);
    }

    #[test]
    fn conditional_probs_sum_to_one() {
        for &(k, psi, eps) in &[(2, 1, 0.0), (5, 10, 0.01), (10, 100, 0.1), (4, 1000, 0.0)] {
            let kernel = SplitKernel::new(&cfg(k, psi, eps)).unwrap();
            for g in 0..200 {
                let u: f64 = (g as f64 + 0.5) / 200.0;
                let p = kernel.conditional_probs(u);
                assert!(p.iter().all(|&x| x >= 0.0));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn high_sharpness_approaches_quantile_bins() {
        let kernel = SplitKernel::new(&cfg(5, 1000, 0.0)).unwrap();
        for j in 1..=5 {
            for offset in [0.3, 0.5, 0.7] {
                let u: f64 = (j as f64 - 1.0 + offset) / 5.0;
                assert!(kernel.conditional_probs(u)[j - 1] > 0.99, "j={j} u={u}");
            }
        }
    }

    #[test]
    fn assignment_balanced_and_reproducible() {
        let n = 10_000;
        let proj = UnitProjection {
            values: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        };
        let c = cfg(5, 10, 0.01);
        let a = assign_splits(&proj, &c).unwrap();
        assert_eq!(a, assign_splits(&proj, &c).unwrap());
        let sd = (n as f64 * 0.2 * 0.8).sqrt();
        for s in a.sizes() {
            assert!((s as f64 - n as f64 / 5.0).abs() < 5.0 * sd, "size {s}");
        }
        let mean_u = |j: usize| {
            let held = a.held(j);
            held.iter().map(|&i| proj.values[i]).sum::<f64>() / held.len() as f64
        };
        assert!(mean_u(1) < mean_u(5));
        let rows = a.conditional_probs.as_ref().unwrap();
        assert!(rows
            .iter()
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn draws_do_not_depend_on_other_samples() {
        let full = UnitProjection {
            values: (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect(),
        };
        let prefix = UnitProjection {
            values: full.values[..40].to_vec(),
        };
        let c = cfg(2, 1, 0.5);
        let a = assign_splits(&full, &c).unwrap();
        let b = assign_splits(&prefix, &c).unwrap();
        assert_eq!(&a.labels[..40], &b.labels[..]);
    }

    #[test]
    fn empty_split_is_an_error() {
        let proj = UnitProjection { values: vec![0.5] };
        assert!(matches!(
            assign_splits(&proj, &cfg(3, 1, 1.0)),
            Err(Error::EmptySplit { .. })
        ));
    }

    #[test]
    fn mutual_information_examples() {
        assert!(
            split_mutual_information(&cfg(5, 10, 1.0), 1000)
                .unwrap()
                .abs()
                < 1e-9
        );
        // k=2, ψ=1: each conditional is Beta(1,2) or Beta(2,1), whose
        // negative differential entropy is ln 2 - 1/2
        let mi = split_mutual_information(&cfg(2, 1, 0.0), 20_000).unwrap();
        assert!((mi - (std::f64::consts::LN_2 - 0.5)).abs() < 1e-6, "{mi}");
        let mut last = f64::INFINITY;
        for g in 0..=20 {
            let eps = g as f64 / 20.0;
            let mi = split_mutual_information(&cfg(5, 10, eps), 1000).unwrap();
            assert!(mi <= last + 1e-12);
            last = mi;
        }
        assert!(split_mutual_information(&cfg(2, 1, 0.0), 10).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let proj = UnitProjection {
            values: vec![0.25, 0.75],
        };
        let a = SplitAssignment {
            labels: vec![1, 2],
            config: cfg(2, 1, 1.0),
            conditional_probs: None,
        };
        let mut buf = Vec::new();
        write_split_csv(&mut buf, &["a".into(), "b".into()], &a, &proj).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("graph_id,label,u_value\n"));
        let rows = read_split_csv(&buf[..]).unwrap();
        assert_eq!(rows, vec![("a".into(), 1, 0.25), ("b".into(), 2, 0.75)]);
    }
}
