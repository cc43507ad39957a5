//! Two-sample comparisons between weighted empirical distributions.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::graph::PropertyMatrix;
use crate::weights::WeightedSample;

/// Values with non-negative weights, not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEmpirical {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedEmpirical {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DegenerateSample(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        check_finite(&values)?;
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::DegenerateSample(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::AllZeroWeights);
        }
        Ok(Self { values, weights })
    }

    pub fn unweighted(values: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; values.len()];
        Self::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            / total
    }

    /// Weighted CDF evaluated by direct summation, `F(z) = Σ wᵢ 1(zᵢ ≤ z) / Σ wᵢ`.
    pub fn cdf(&self, z: f64) -> f64 {
        let total: f64 = self.weights.iter().sum();
        let below: f64 = self
            .values
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| **v <= z)
            .map(|(_, w)| w)
            .sum();
        below / total
    }

    /// Distinct sorted values with their normalized masses.
    fn atoms(&self) -> Vec<(f64, f64)> {
        let total: f64 = self.weights.iter().sum();
        let mut pairs: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| (v, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match atoms.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => atoms.push((v, w)),
            }
        }
        for atom in &mut atoms {
            atom.1 /= total;
        }
        atoms
    }
}

/// Merged walk over both step CDFs, yielding `(z, F_a(z), F_b(z))` at every
/// distinct value of the union, right limits.
fn merged_steps(a: &WeightedEmpirical, b: &WeightedEmpirical) -> Vec<(f64, f64, f64)> {
    let (xa, xb) = (a.atoms(), b.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut out = Vec::with_capacity(xa.len() + xb.len());
    while i < xa.len() || j < xb.len() {
        let za = xa.get(i).map_or(f64::INFINITY, |p| p.0);
        let zb = xb.get(j).map_or(f64::INFINITY, |p| p.0);
        let z = za.min(zb);
        // advance both samples on a shared value before measuring
        if za == z {
            fa += xa[i].1;
            i += 1;
        }
        if zb == z {
            fb += xb[j].1;
            j += 1;
        }
        if i == xa.len() {
            fa = 1.0;
        }
        if j == xb.len() {
            fb = 1.0;
        }
        out.push((z, fa, fb));
    }
    out
}

/// `sup_z |F_a(z) − F_b(z)|` over the weighted empirical CDFs.
pub fn weighted_ks(a: &WeightedEmpirical, b: &WeightedEmpirical) -> f64 {
    let mut stat = 0.0f64;
    let mut prev_gap = 0.0f64;
    for (_, fa, fb) in merged_steps(a, b) {
        // left limit at this jump is the right limit of the previous one
        let gap = (fa - fb).abs();
        stat = stat.max(prev_gap).max(gap);
        prev_gap = gap;
    }
    stat.min(1.0)
}

pub fn weighted_mean_diff(a: &WeightedEmpirical, b: &WeightedEmpirical) -> f64 {
    (a.mean() - b.mean()).abs()
}

/// `∫ |F_a(z) − F_b(z)| dz`, exact on the merged breakpoints.
pub fn weighted_wasserstein1(a: &WeightedEmpirical, b: &WeightedEmpirical) -> f64 {
    let steps = merged_steps(a, b);
    steps
        .windows(2)
        .map(|w| (w[0].1 - w[0].2).abs() * (w[1].0 - w[0].0))
        .sum()
}

/// Metric applied to one test property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ks,
    MeanDiff,
    Wasserstein1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Ks => "ks",
            Metric::MeanDiff => "mean_diff",
            Metric::Wasserstein1 => "wasserstein1",
        }
    }

    pub fn compute(self, a: &WeightedEmpirical, b: &WeightedEmpirical) -> f64 {
        match self {
            Metric::Ks => weighted_ks(a, b),
            Metric::MeanDiff => weighted_mean_diff(a, b),
            Metric::Wasserstein1 => weighted_wasserstein1(a, b),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ks" => Ok(Metric::Ks),
            "mean_diff" | "mean" => Ok(Metric::MeanDiff),
            "wasserstein1" | "w1" => Ok(Metric::Wasserstein1),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Empirical distributions of test property `test_property`: the held rows
/// with unit weights and the generated samples with their weights.
pub fn held_and_generated(
    held: &PropertyMatrix,
    gen: &[WeightedSample],
    test_property: usize,
) -> Result<(WeightedEmpirical, WeightedEmpirical)> {
    held.registry.check_index(test_property)?;
    let held_emp = WeightedEmpirical::unweighted(held.column(test_property))?;
    let gen_emp = WeightedEmpirical::new(
        gen.iter()
            .map(|s| s.property_vector.values[test_property])
            .collect(),
        gen.iter().map(|s| s.weight).collect(),
    )?;
    Ok((held_emp, gen_emp))
}

/// Weighted KS on test property `test_property` between unit-weighted
/// held rows and weighted generated samples. The test property must differ
/// from the split property the weights were fitted on.
pub fn vv_ks(
    held: &PropertyMatrix,
    gen: &[WeightedSample],
    split_property: usize,
    test_property: usize,
) -> Result<f64> {
    if test_property == split_property {
        return Err(Error::PropertyIndexMismatch {
            split: split_property,
            test: test_property,
        });
    }
    let (h, g) = held_and_generated(held, gen, test_property)?;
    Ok(weighted_ks(&h, &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emp(values: &[f64], weights: &[f64]) -> WeightedEmpirical {
        WeightedEmpirical::new(values.to_vec(), weights.to_vec()).unwrap()
    }

    fn brute_ks(a: &WeightedEmpirical, b: &WeightedEmpirical) -> f64 {
        a.values()
            .iter()
            .chain(b.values())
            .map(|&z| (a.cdf(z) - b.cdf(z)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_examples() {
        let a = emp(&[0.0, 1.0, 2.0], &[1.0, 2.0, 1.0]);
        assert_eq!(weighted_ks(&a, &a), 0.0);
        assert_eq!(weighted_ks(&emp(&[0.0], &[1.0]), &emp(&[1.0], &[1.0])), 1.0);
        let ks = weighted_ks(
            &emp(&[0.0, 1.0], &[1.0, 1.0]),
            &emp(&[0.0, 1.0], &[1.0, 3.0]),
        );
        assert_eq!(ks, 0.25);
    }

    #[test]
    fn ks_handles_cross_sample_ties() {
        let a = emp(&[1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]);
        let b = emp(&[1.0, 2.0, 2.0], &[1.0, 1.0, 1.0]);
        assert!((weighted_ks(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mean_diff_examples() {
        let a = emp(&[0.0, 2.0], &[1.0, 1.0]);
        assert_eq!(weighted_mean_diff(&a, &a), 0.0);
        assert_eq!(weighted_mean_diff(&a, &emp(&[1.0], &[1.0])), 0.0);
        let d = weighted_mean_diff(
            &emp(&[0.0, 1.0], &[3.0, 1.0]),
            &emp(&[0.0, 1.0], &[1.0, 1.0]),
        );
        assert_eq!(d, 0.25);
    }

    #[test]
    fn wasserstein_examples() {
        let a = emp(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(weighted_wasserstein1(&a, &a), 0.0);
        assert_eq!(
            weighted_wasserstein1(&emp(&[0.0], &[1.0]), &emp(&[1.0], &[1.0])),
            1.0
        );
        assert_eq!(
            weighted_wasserstein1(&a, &emp(&[0.5, 0.5], &[1.0, 1.0])),
            0.5
        );
    }

    #[test]
    fn invalid_samples_rejected() {
        assert!(WeightedEmpirical::new(vec![1.0], vec![]).is_err());
        assert!(WeightedEmpirical::new(vec![1.0], vec![0.0]).is_err());
        assert!(WeightedEmpirical::new(vec![1.0], vec![-1.0]).is_err());
        assert!(WeightedEmpirical::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    fn arb_emp() -> impl Strategy<Value = WeightedEmpirical> {
        proptest::collection::vec((0i32..30, 0.0f64..5.0), 1..60).prop_filter_map(
            "zero total weight",
            |pairs| {
                let (v, w): (Vec<f64>, Vec<f64>) = pairs
                    .into_iter()
                    .map(|(v, w)| (f64::from(v) / 3.0, w))
                    .unzip();
                WeightedEmpirical::new(v, w).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn ks_matches_brute_force(a in arb_emp(), b in arb_emp()) {
            prop_assert!((weighted_ks(&a, &b) - brute_ks(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn metrics_symmetric_and_bounded(a in arb_emp(), b in arb_emp()) {
            let ks = weighted_ks(&a, &b);
            prop_assert!((0.0..=1.0).contains(&ks));
            prop_assert_eq!(ks, weighted_ks(&b, &a));
            prop_assert!((weighted_wasserstein1(&a, &b) - weighted_wasserstein1(&b, &a)).abs() < 1e-12);
            prop_assert!(weighted_wasserstein1(&a, &b) >= 0.0);
            prop_assert_eq!(weighted_ks(&a, &a), 0.0);
            prop_assert_eq!(weighted_wasserstein1(&a, &a), 0.0);
            prop_assert_eq!(weighted_mean_diff(&a, &a), 0.0);
        }

        #[test]
        fn ks_scale_invariant(a in arb_emp(), b in arb_emp(), c in 0.5f64..8.0) {
            // power-of-two scaling is exact in floating point
            let c = c.log2().round().exp2();
            let scaled = WeightedEmpirical::new(
                a.values().to_vec(),
                a.weights().iter().map(|w| w * c).collect(),
            ).unwrap();
            prop_assert_eq!(weighted_ks(&a, &b), weighted_ks(&scaled, &b));
        }
    }
}
