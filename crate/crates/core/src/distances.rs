//! Total variation, maximum pairwise column distance and threshold mixing.
//!
//! Matrix 1-norms are max column sums, so for a translation-invariant kernel
//! `(1/2) ||P - u 1^T||_1` is just the total variation between the first
//! column and the uniform distribution.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use crate::error::{invalid, Error, Result};
use crate::kernels::Kernel;

/// A probability vector: entries `>= 0` summing to one within `1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("empty distribution"));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(invalid(format!("probability {bad} out of range")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Parameters of the threshold-mixing criteria (contraction alpha, mass fraction beta, floor gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl ThresholdParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_beta_gamma(beta, gamma)?;
        check_epsilon(epsilon)?;
        Ok(Self {
            alpha,
            beta,
            gamma,
            epsilon,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

fn check_beta_gamma(beta: f64, gamma: f64) -> Result<()> {
    if !(beta > 0.5 && beta <= 1.0) {
        return Err(invalid(format!("beta must lie in (1/2, 1], got {beta}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    Ok(())
}

/// `(1/2) sum |a_i - b_i|` on raw slices of equal length.
pub fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(tv_slices(&a.probs, &b.probs))
}

/// Total variation between the kernel's first column and uniform, which is
/// `(1/2) ||P - u 1^T||_1` for a translation-invariant kernel.
pub fn distance_to_uniform(k: &Kernel) -> f64 {
    let u = 1.0 / k.len() as f64;
    0.5 * k.first_column().iter().map(|p| (p - u).abs()).sum::<f64>()
}

/// `d(P) = max_{j, j'} (1/2) ||P(., j) - P(., j')||_1`.
///
/// Column `j` is the first column translated by `j`, so the maximum runs over
/// non-zero shifts only: `O(N^2)`.
pub fn pairwise_column_distance(k: &Kernel) -> f64 {
    let lattice = k.lattice();
    let col = k.first_column();
    let n = col.len();
    (1..n)
        .map(|s| {
            0.5 * (0..n)
                .map(|l| (col[l] - col[lattice.sub_index(l, s)]).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `d(P)` of an arbitrary column-stochastic matrix given by its columns.
pub fn dense_pairwise_column_distance(columns: &[Vec<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in columns.iter().enumerate() {
        for b in &columns[i + 1..] {
            best = best.max(tv_slices(a, b));
        }
    }
    best
}

/// Rounds guaranteeing threshold mixing when `d(P) <= alpha`:
/// `ceil(ln(2e) / ln(1/alpha))`.
pub fn prop1_rounds(alpha: f64) -> Result<u32> {
    check_alpha(alpha)?;
    Ok(ceil_log(2.0 * E, alpha))
}

/// `ceil(log_{1/alpha}(target))` with a guard against round-off just above
/// an integer.
pub fn ceil_log(target: f64, alpha: f64) -> u32 {
    let ratio = target.ln() / (1.0 / alpha).ln();
    (ratio - 1e-12).ceil().max(0.0) as u32
}

/// Bound `d(P) <= 1 - gamma (1 - 2 (1 - beta))` when at least `beta N` entries
/// of every column are `>= gamma / N`.
pub fn prop2_bound(beta: f64, gamma: f64) -> Result<f64> {
    check_beta_gamma(beta, gamma)?;
    Ok(1.0 - gamma * (1.0 - 2.0 * (1.0 - beta)))
}

/// Smallest grid time from which every later grid point is within `epsilon`
/// of uniform. `None` when the tail never settles.
pub fn epsilon_mixing_time(family: &[(f64, Kernel)], epsilon: f64) -> Result<Option<f64>> {
    if family.is_empty() {
        return Err(Error::EmptyGrid);
    }
    check_epsilon(epsilon)?;
    if family.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(invalid("time grid must be non-decreasing"));
    }
    let mut settled = None;
    for (t, k) in family.iter().rev() {
        if distance_to_uniform(k) <= epsilon {
            settled = Some(*t);
        } else {
            break;
        }
    }
    Ok(settled)
}
