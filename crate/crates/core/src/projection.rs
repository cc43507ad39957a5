//! Projection of 1-D property values onto the unit interval through a
//! generalized empirical CDF.
//!
//! A base dataset fixes, for each distinct value `b`, the step of the
//! empirical CDF it owns: `[F⁻(b), F⁺(b)]` with `F⁻(b) = #{bᵢ < b}/n` and
//! `F⁺(b) = #{bᵢ ≤ b}/n`. A projected point is snapped to its nearest base
//! value and all points sharing that base value are spread evenly across
//! the step at offsets `(r - 0.5)/size` (a centered regular lattice). When
//! the projected set equals the base set, the output is exactly
//! `{(i - 0.5)/n}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::rng::keyed_rng;

/// Left/right empirical CDF levels of a base dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfModel {
    distinct: Vec<f64>,
    /// `#{bᵢ < distinct[k]}`
    below: Vec<usize>,
    /// multiplicity of `distinct[k]`
    count: Vec<usize>,
    n: usize,
}

/// How points within one nearest-base class are placed on their CDF step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Spread {
    /// Centered lattice, ties broken by input position.
    #[default]
    Lattice,
    /// Independent uniform offset per point, keyed by `(seed, position)`.
    Randomized { seed: u64 },
}

/// Unit-interval coordinates aligned with the projected input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitProjection {
    pub values: Vec<f64>,
}

impl UnitProjection {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn fit_ecdf(base: &[f64]) -> Result<EcdfModel> {
    EcdfModel::fit(base)
}

pub fn project(model: &EcdfModel, test: &[f64]) -> Result<UnitProjection> {
    model.project(test, Spread::Lattice)
}

impl EcdfModel {
    pub fn fit(base: &[f64]) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::EmptyBase);
        }
        check_finite(base)?;
        let mut sorted = base.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = Vec::new();
        let mut below = Vec::new();
        let mut count: Vec<usize> = Vec::new();
        for (i, &b) in sorted.iter().enumerate() {
            if distinct.last() == Some(&b) {
                *count.last_mut().unwrap() += 1;
            } else {
                distinct.push(b);
                below.push(i);
                count.push(1);
            }
        }
        Ok(Self {
            distinct,
            below,
            count,
            n: sorted.len(),
        })
    }

    pub fn base_len(&self) -> usize {
        self.n
    }

    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct
    }

    /// `#{bᵢ < x} / n`
    pub fn left_cdf(&self, x: f64) -> f64 {
        let k = self.distinct.partition_point(|&b| b < x);
        self.cumulative(k) as f64 / self.n as f64
    }

    /// `#{bᵢ ≤ x} / n`
    pub fn right_cdf(&self, x: f64) -> f64 {
        let k = self.distinct.partition_point(|&b| b <= x);
        self.cumulative(k) as f64 / self.n as f64
    }

    fn cumulative(&self, k: usize) -> usize {
        if k == self.distinct.len() {
            self.n
        } else {
            self.below[k]
        }
    }

    /// Index of the nearest distinct base value; equidistant points go to
    /// the smaller one.
    pub fn nearest(&self, x: f64) -> usize {
        let k = self.distinct.partition_point(|&b| b < x);
        if k == 0 {
            return 0;
        }
        if k == self.distinct.len() {
            return k - 1;
        }
        let (lo, hi) = (self.distinct[k - 1], self.distinct[k]);
        if hi - x < x - lo {
            k
        } else {
            k - 1
        }
    }

    pub fn project(&self, test: &[f64], spread: Spread) -> Result<UnitProjection> {
        if test.is_empty() {
            return Err(Error::EmptyTest);
        }
        check_finite(test)?;
        let nearest: Vec<usize> = test.iter().map(|&a| self.nearest(a)).collect();
        // group by nearest base value, then by value, then by input position
        let mut order: Vec<usize> = (0..test.len()).collect();
        order.sort_by(|&i, &j| {
            nearest[i]
                .cmp(&nearest[j])
                .then(test[i].total_cmp(&test[j]))
                .then(i.cmp(&j))
        });
        let n = self.n as f64;
        let mut values = vec![0.0; test.len()];
        for class in order.chunk_by(|&i, &j| nearest[i] == nearest[j]) {
            let k = nearest[class[0]];
            let below = self.below[k] as f64;
            let mult = self.count[k] as f64;
            let size = class.len() as f64;
            for (r, &i) in class.iter().enumerate() {
                // (1-v)·F⁻ + v·F⁺ = (below + v·mult)/n; with v·mult grouped as
                // ((r+0.5)·mult)/size so that size == mult is exact.
                let offset = match spread {
                    Spread::Lattice => ((r as f64 + 0.5) * mult) / size,
                    Spread::Randomized { seed } => {
                        let v: f64 = keyed_rng(seed, i as u64).random();
                        v * mult
                    }
                };
                values[i] = (below + offset) / n;
            }
        }
        Ok(UnitProjection { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fit_levels() {
        let m = fit_ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.left_cdf(2.0), 1.0 / 3.0);
        assert_eq!(m.right_cdf(2.0), 2.0 / 3.0);
        let m = fit_ecdf(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.left_cdf(1.0), 0.0);
        assert_eq!(m.right_cdf(1.0), 2.0 / 3.0);
        let m = fit_ecdf(&[5.0]).unwrap();
        assert_eq!((m.left_cdf(5.0), m.right_cdf(5.0)), (0.0, 1.0));
        assert!(matches!(fit_ecdf(&[]), Err(Error::EmptyBase)));
        assert!(matches!(
            fit_ecdf(&[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let m = fit_ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            project(&m, &[1.0, 2.0, 3.0]).unwrap().values,
            [1.0 / 6.0, 0.5, 5.0 / 6.0]
        );

        let m = fit_ecdf(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            project(&m, &[1.0, 1.0, 2.0]).unwrap().values,
            [1.0 / 6.0, 0.5, 5.0 / 6.0]
        );

        let m = fit_ecdf(&[1.0, 2.0]).unwrap();
        assert_eq!(
            project(&m, &[3.0, 3.0]).unwrap().values,
            [5.0 / 8.0, 7.0 / 8.0]
        );
        assert!(matches!(project(&m, &[]), Err(Error::EmptyTest)));
    }

    #[test]
    fn class_spreads_by_value_then_position() {
        // class of nearest base 1.0 is {1, 0.5, 1.5}; 1.0 is the middle element
        let m = fit_ecdf(&[1.0, 5.0]).unwrap();
        let p = project(&m, &[1.0, 0.5, 1.5]).unwrap();
        assert_eq!(p.values[0], 0.25);
        assert!(p.values[1] < p.values[0] && p.values[0] < p.values[2]);
        // equal values keep input order
        let p = project(&m, &[0.9, 0.9]).unwrap();
        assert!(p.values[0] < p.values[1]);
    }

    #[test]
    fn nearest_tie_goes_to_smaller_base() {
        let m = fit_ecdf(&[0.0, 2.0]).unwrap();
        assert_eq!(m.nearest(1.0), 0);
        assert_eq!(m.nearest(1.5), 1);
        assert_eq!(project(&m, &[1.0]).unwrap().values, [0.25]);
    }

    #[test]
    fn randomized_spread_stays_in_step() {
        let m = fit_ecdf(&[1.0, 1.0, 2.0, 3.0]).unwrap();
        let a = m
            .project(&[1.0, 1.0, 3.0], Spread::Randomized { seed: 9 })
            .unwrap();
        let b = m
            .project(&[1.0, 1.0, 3.0], Spread::Randomized { seed: 9 })
            .unwrap();
        assert_eq!(a, b);
        assert!(a.values[..2].iter().all(|&u| (0.0..=0.5).contains(&u)));
        assert!((0.75..=1.0).contains(&a.values[2]));
    }

    fn lattice(n: usize) -> Vec<f64> {
        (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
    }

    proptest! {
        #[test]
        fn self_projection_is_centered_lattice(
            base in proptest::collection::vec(-5i32..5, 1..200)
                .prop_map(|v| v.into_iter().map(f64::from).collect::<Vec<_>>())
        ) {
            let m = fit_ecdf(&base).unwrap();
            let mut u = project(&m, &base).unwrap().values;
            u.sort_by(f64::total_cmp);
            prop_assert_eq!(u, lattice(base.len()));
        }

        #[test]
        fn projected_values_in_open_interval(
            base in proptest::collection::vec(-10.0f64..10.0, 1..50),
            test in proptest::collection::vec(-20.0f64..20.0, 1..50),
        ) {
            let m = fit_ecdf(&base).unwrap();
            let p = project(&m, &test).unwrap();
            prop_assert!(p.values.iter().all(|&u| u > 0.0 && u < 1.0));
            // monotone: sorted inputs give sorted outputs
            let mut sorted = test.clone();
            sorted.sort_by(f64::total_cmp);
            let q = project(&m, &sorted).unwrap().values;
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
