//! Importance weights for generated samples by kernel mean matching, and
//! the effective sample size of a weighted sample.
//!
//! Given generated values `zᵢ` and held-out values `z'ⱼ` of the split
//! property, the weights solve
//!
//! ```text
//! min_β  ½ βᵀKβ − κᵀβ,   K_ii' = k(zᵢ, zᵢ'),  κᵢ = (n_gen/n_held) Σⱼ k(zᵢ, z'ⱼ)
//! s.t.   0 ≤ βᵢ ≤ B,     |Σβᵢ − n_gen| ≤ n_gen·slack
//! ```
//!
//! with an RBF kernel. Property values repeat a lot (counts, degrees), so
//! the solver works on distinct values with multiplicities. Starting from
//! the symmetric point `β = 1`, every iterate assigns equal weight to equal
//! values, so the reduced iteration is the full-dimensional one, only cheaper.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::graph::PropertyVector;

/// How the RBF kernel parameter `γ` in `exp(−γ(x−y)²)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `γ = 10 / σ(held)`, population standard deviation of the held values.
    TenOverSigma,
    /// Explicit `γ > 0`.
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KmmConfig {
    pub bandwidth: Bandwidth,
    /// Upper bound `B` on each weight.
    pub weight_upper_bound: f64,
    /// Relative slack on the weight-sum constraint, in `(0, 1)`.
    pub constraint_slack: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for KmmConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::TenOverSigma,
            weight_upper_bound: 1000.0,
            constraint_slack: 0.05,
            max_iters: 5000,
            tolerance: 1e-7,
        }
    }
}

impl KmmConfig {
    pub fn validate(&self) -> Result<()> {
        // B ≥ 1 keeps the sum constraint feasible
        if self.weight_upper_bound.is_nan() || self.weight_upper_bound < 1.0 {
            return Err(Error::Config(format!(
                "weight upper bound must be at least 1, got {}",
                self.weight_upper_bound
            )));
        }
        if !(self.constraint_slack > 0.0 && self.constraint_slack < 1.0) {
            return Err(Error::Config(format!(
                "constraint slack must lie in (0, 1), got {}",
                self.constraint_slack
            )));
        }
        if let Bandwidth::Gamma(g) = self.bandwidth {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Config(format!(
                    "kernel gamma must be positive, got {g}"
                )));
            }
        }
        if self.max_iters == 0 || self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config(
                "max_iters and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn gamma_for(&self, held: &[f64]) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Gamma(g) => Ok(g),
            Bandwidth::TenOverSigma => {
                let sigma = population_std(held);
                if sigma > 0.0 {
                    Ok(10.0 / sigma)
                } else {
                    Err(Error::DegenerateHeld)
                }
            }
        }
    }
}

/// A generated graph's properties with its importance weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub property_vector: PropertyVector,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmmWeights {
    /// Solver output, inside the box and the sum slab.
    pub beta: Vec<f64>,
    /// `beta` rescaled to mean 1.
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out before the tolerance was met; the
    /// weights are then the best feasible iterate.
    pub converged: bool,
    pub objective: f64,
}

pub fn rbf_kernel(x: f64, y: f64, gamma: f64) -> f64 {
    let d = x - y;
    (-gamma * d * d).exp()
}

/// `(Σw)² / Σw²`.
pub fn effective_sample_size(weights: &[f64]) -> Result<f64> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::DegenerateSample(format!(
            "weight {w} is negative or non-finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if sum == 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(sum * sum / sum_sq)
}

pub fn estimate_weights(gen_z: &[f64], held_z: &[f64], cfg: &KmmConfig) -> Result<KmmWeights> {
    cfg.validate()?;
    if gen_z.is_empty() || held_z.is_empty() {
        return Err(Error::EmptyTest);
    }
    check_finite(gen_z)?;
    check_finite(held_z)?;
    let gamma = cfg.gamma_for(held_z)?;

    let (gen_vals, gen_counts, class_of) = distinct_with_counts(gen_z);
    let (held_vals, held_counts, _) = distinct_with_counts(held_z);
    let n_gen = gen_z.len() as f64;
    let ratio = n_gen / held_z.len() as f64;

    let kappa: Vec<f64> = gen_vals
        .iter()
        .map(|&x| {
            let s: f64 = held_vals
                .iter()
                .zip(&held_counts)
                .map(|(&y, &d)| d * rbf_kernel(x, y, gamma))
                .sum();
            ratio * s
        })
        .collect();

    let problem = ReducedQp::new(&gen_vals, gen_counts, kappa, gamma);
    let bounds = SumBounds {
        upper: cfg.weight_upper_bound,
        lo: n_gen * (1.0 - cfg.constraint_slack),
        hi: n_gen * (1.0 + cfg.constraint_slack),
    };
    let solution = problem.solve(&bounds, cfg.max_iters, cfg.tolerance);
    if !solution.converged {
        log::debug!(
            "kernel mean matching stopped after {} iterations without meeting tolerance {}",
            solution.iterations,
            cfg.tolerance
        );
    }

    let beta: Vec<f64> = class_of.iter().map(|&c| solution.beta[c]).collect();
    let mean = beta.iter().sum::<f64>() / n_gen;
    let weights = beta.iter().map(|b| b / mean).collect();
    Ok(KmmWeights {
        beta,
        weights,
        gamma,
        iterations: solution.iterations,
        converged: solution.converged,
        objective: solution.objective,
    })
}

/// Writes `graph_id,weight` rows.
pub fn write_weights_csv(w: impl Write, samples: &[WeightedSample]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["graph_id", "weight"])?;
    for s in samples {
        writer.write_record([s.property_vector.graph_id.as_str(), &s.weight.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Sorted distinct values, their multiplicities, and the class of each input.
fn distinct_with_counts(values: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut distinct: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    let mut class_of = vec![0; values.len()];
    for i in order {
        if distinct.last() != Some(&values[i]) {
            distinct.push(values[i]);
            counts.push(0.0);
        }
        *counts.last_mut().unwrap() += 1.0;
        class_of[i] = distinct.len() - 1;
    }
    (distinct, counts, class_of)
}

struct SumBounds {
    upper: f64,
    lo: f64,
    hi: f64,
}

/// KMM on distinct values: `β` holds one weight per class, `counts` the
/// class sizes. Gradients and norms are those of the full problem.
struct ReducedQp {
    kernel: Gram,
    counts: Vec<f64>,
    kappa: Vec<f64>,
    m: usize,
    lipschitz: f64,
}

struct QpSolution {
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    objective: f64,
}

/// Above this many distinct values the Gram matrix is replaced by a
/// truncated pivoted Cholesky factor when that factor is small.
const LOW_RANK_MIN_SIZE: usize = 256;
/// Residual diagonal at which the pivoted Cholesky factor stops.
const LOW_RANK_TOL: f64 = 1e-13;

enum Gram {
    Dense(Vec<f64>),
    /// `K ≈ F Fᵀ`, `F` stored row-major as `m × rank`.
    LowRank {
        factor: Vec<f64>,
        rank: usize,
    },
}

impl Gram {
    fn dense(values: &[f64], gamma: f64) -> Self {
        let m = values.len();
        let mut kernel = vec![0.0; m * m];
        for a in 0..m {
            kernel[a * m + a] = 1.0;
            for b in a + 1..m {
                let k = rbf_kernel(values[a], values[b], gamma);
                kernel[a * m + b] = k;
                kernel[b * m + a] = k;
            }
        }
        Gram::Dense(kernel)
    }

    /// Pivoted Cholesky with at most `max_rank` columns; `None` when the
    /// residual is still above tolerance at that rank.
    fn low_rank(values: &[f64], gamma: f64, max_rank: usize) -> Option<Self> {
        let m = values.len();
        let mut diag = vec![1.0; m];
        let mut cols: Vec<Vec<f64>> = Vec::new();
        loop {
            let (pivot, &largest) = diag
                .iter()
                .enumerate()
                .max_by(|a, b| f64::total_cmp(a.1, b.1))?;
            if largest <= LOW_RANK_TOL {
                break;
            }
            if cols.len() == max_rank {
                return None;
            }
            let root = largest.sqrt();
            let col: Vec<f64> = (0..m)
                .map(|a| {
                    let prior: f64 = cols.iter().map(|c| c[a] * c[pivot]).sum();
                    (rbf_kernel(values[a], values[pivot], gamma) - prior) / root
                })
                .collect();
            for (d, c) in diag.iter_mut().zip(&col) {
                *d = (*d - c * c).max(0.0);
            }
            diag[pivot] = 0.0;
            cols.push(col);
        }
        let rank = cols.len();
        let mut factor = vec![0.0; m * rank];
        for (r, col) in cols.iter().enumerate() {
            for (a, &v) in col.iter().enumerate() {
                factor[a * rank + r] = v;
            }
        }
        Some(Gram::LowRank { factor, rank })
    }

    fn build(values: &[f64], gamma: f64) -> Self {
        let m = values.len();
        if m >= LOW_RANK_MIN_SIZE {
            if let Some(g) = Self::low_rank(values, gamma, m / 4) {
                return g;
            }
        }
        Self::dense(values, gamma)
    }

    /// `out = K v`.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let m = v.len();
        match self {
            Gram::Dense(kernel) => {
                for (a, o) in out.iter_mut().enumerate() {
                    let row = &kernel[a * m..(a + 1) * m];
                    *o = row.iter().zip(v).map(|(k, w)| k * w).sum();
                }
            }
            Gram::LowRank { factor, rank } => {
                let mut proj = vec![0.0; *rank];
                for (row, &w) in factor.chunks_exact(*rank).zip(v) {
                    for (p, f) in proj.iter_mut().zip(row) {
                        *p += f * w;
                    }
                }
                for (row, o) in factor.chunks_exact(*rank).zip(out.iter_mut()) {
                    *o = row.iter().zip(&proj).map(|(f, p)| f * p).sum();
                }
            }
        }
    }
}

impl ReducedQp {
    fn new(values: &[f64], counts: Vec<f64>, kappa: Vec<f64>, gamma: f64) -> Self {
        let m = values.len();
        let kernel = Gram::build(values, gamma);
        // Gershgorin bound on the full kernel matrix: largest row sum
        // (entries are positive, so row sums are `K c`)
        let mut row_sums = vec![0.0; m];
        kernel.apply(&counts, &mut row_sums);
        let lipschitz = row_sums.iter().cloned().fold(0.0, f64::max);
        Self {
            kernel,
            counts,
            kappa,
            m,
            lipschitz,
        }
    }

    /// `(Kβ)` per class in the full problem: `Σ_b c_b K_ab β_b`.
    fn kernel_product(&self, beta: &[f64], out: &mut [f64]) {
        let weighted: Vec<f64> = beta.iter().zip(&self.counts).map(|(b, c)| b * c).collect();
        self.kernel.apply(&weighted, out);
    }

    fn objective(&self, beta: &[f64], k_beta: &[f64]) -> f64 {
        (0..self.m)
            .map(|a| self.counts[a] * beta[a] * (0.5 * k_beta[a] - self.kappa[a]))
            .sum()
    }

    /// Euclidean projection (in the full space) onto the box intersected
    /// with the sum slab: `βₐ = clip(xₐ − τ, 0, B)` with the scalar shift
    /// `τ` chosen so the sum lands in `[lo, hi]`.
    fn project(&self, x: &[f64], bounds: &SumBounds, out: &mut [f64]) {
        let clipped_sum = |tau: f64| -> f64 {
            x.iter()
                .zip(&self.counts)
                .map(|(&v, &c)| c * (v - tau).clamp(0.0, bounds.upper))
                .sum()
        };
        let s0 = clipped_sum(0.0);
        let tau = if s0 > bounds.hi {
            self.shift_for(x, bounds, bounds.hi)
        } else if s0 < bounds.lo {
            self.shift_for(x, bounds, bounds.lo)
        } else {
            0.0
        };
        for (o, &v) in out.iter_mut().zip(x) {
            *o = (v - tau).clamp(0.0, bounds.upper);
        }
    }

    /// Solves `S(τ) = target` for the non-increasing piecewise-linear sum
    /// `S(τ) = Σ cₐ clip(xₐ − τ, 0, B)`.
    fn shift_for(&self, x: &[f64], bounds: &SumBounds, target: f64) -> f64 {
        let upper = bounds.upper;
        let mut knots: Vec<f64> = x.iter().flat_map(|&v| [v, v - upper]).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let sum_at = |tau: f64| -> f64 {
            x.iter()
                .zip(&self.counts)
                .map(|(&v, &c)| c * (v - tau).clamp(0.0, upper))
                .sum()
        };
        // S is non-increasing in τ; find adjacent knots bracketing the target
        let (mut lo, mut hi) = (0usize, knots.len() - 1);
        if sum_at(knots[lo]) <= target {
            return knots[lo];
        }
        if sum_at(knots[hi]) >= target {
            return knots[hi];
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if sum_at(knots[mid]) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // linear between knots[lo] and knots[hi]
        let (t0, t1) = (knots[lo], knots[hi]);
        let mid = 0.5 * (t0 + t1);
        let mut fixed = 0.0;
        let mut slope = 0.0;
        for (&v, &c) in x.iter().zip(&self.counts) {
            let r = v - mid;
            if r >= upper {
                fixed += c * upper;
            } else if r > 0.0 {
                fixed += c * v;
                slope += c;
            }
        }
        if slope == 0.0 {
            return t0;
        }
        ((fixed - target) / slope).clamp(t0, t1)
    }

    /// Monotone accelerated projected gradient (FISTA with objective
    /// safeguard), step `1/L`, started from `β = 1`.
    fn solve(&self, bounds: &SumBounds, max_iters: usize, tol: f64) -> QpSolution {
        let m = self.m;
        let step = 1.0 / self.lipschitz;
        let mut x = vec![0.0; m];
        self.project(&vec![1.0; m], bounds, &mut x);
        let mut kx = vec![0.0; m];
        self.kernel_product(&x, &mut kx);
        let mut fx = self.objective(&x, &kx);

        let mut y = x.clone();
        let mut ky = kx.clone();
        let mut t = 1.0f64;
        let mut z = vec![0.0; m];
        let mut kz = vec![0.0; m];
        let mut trial = vec![0.0; m];
        let mut converged = false;
        let mut iterations = 0;

        while iterations < max_iters {
            iterations += 1;
            for a in 0..m {
                trial[a] = y[a] - step * (ky[a] - self.kappa[a]);
            }
            self.project(&trial, bounds, &mut z);
            let gap = z
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            self.kernel_product(&z, &mut kz);
            let fz = self.objective(&z, &kz);

            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            if fz <= fx {
                // y ← z + ((t−1)/t_next)(z − x)
                let momentum = (t - 1.0) / t_next;
                for a in 0..m {
                    y[a] = z[a] + momentum * (z[a] - x[a]);
                    ky[a] = kz[a] + momentum * (kz[a] - kx[a]);
                }
                std::mem::swap(&mut x, &mut z);
                std::mem::swap(&mut kx, &mut kz);
                debug_assert!(fz <= fx + 1e-9 * fx.abs().max(1.0));
                fx = fz;
                t = t_next;
            } else {
                // rejected: restart momentum from the incumbent
                y.copy_from_slice(&x);
                ky.copy_from_slice(&kx);
                t = 1.0;
            }
            let scale = x.iter().cloned().fold(1.0, f64::max);
            if gap <= tol * scale {
                converged = true;
                break;
            }
        }
        QpSolution {
            beta: x,
            iterations,
            converged,
            objective: fx,
        }
    }
}
