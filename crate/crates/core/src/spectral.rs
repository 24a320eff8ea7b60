//! Closed-form spectral data of cycles and product lattices.
//!
//! The normalized adjacency matrix of `Z_n` is circulant, diagonalized by the
//! Fourier vectors `v_j = n^{-1/2} (1, w^j, w^{2j}, ...)` with `w = e^{2 pi i/n}`
//! and eigenvalues `lambda_j = cos(2 pi j/n)`. Hence
//!
//! ```text
//! <q| e^{i s t A} |p> = (1/n) sum_j e^{i s t lambda_j} w^{(q-p) j}
//! ```
//!
//! where `s` is the [`TimeScale`] of the factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Result};
use crate::lattice::{CycleSpec, LatticeSpec};

/// Multiplier applied to time on a single cycle factor.
///
/// The joint walk on a `d`-dimensional lattice is generated by
/// `(1/d) sum_k H_k`, so each factor evolves with scale `1/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScale(f64);

impl TimeScale {
    pub const FULL: TimeScale = TimeScale(1.0);
    pub const HALF: TimeScale = TimeScale(0.5);

    pub fn for_dimension(d: usize) -> Self {
        match d {
            1 => Self::FULL,
            2 => Self::HALF,
            _ => TimeScale(1.0 / d as f64),
        }
    }

    pub fn factor(self) -> f64 {
        self.0
    }
}

/// Eigenvalues `cos(2 pi j/n)` and roots of unity `w^j` of one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenphaseTable {
    n: usize,
    lambdas: Vec<f64>,
    unit_roots: Vec<Complex64>,
}

impl EigenphaseTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn unit_roots(&self) -> &[Complex64] {
        &self.unit_roots
    }

    /// `w^k` for any integer exponent.
    pub fn root(&self, k: i64) -> Complex64 {
        self.unit_roots[k.rem_euclid(self.n as i64) as usize]
    }

    /// `e^{i s t lambda_j}` for every `j`.
    pub fn phases(&self, t: f64, scale: TimeScale) -> Vec<Complex64> {
        let st = scale.factor() * t;
        self.lambdas
            .iter()
            .map(|&lam| Complex64::from_polar(1.0, st * lam))
            .collect()
    }

    /// `(1/n) sum_j phases[j] w^{offset j}`.
    pub fn amplitude_from_phases(&self, phases: &[Complex64], offset: usize) -> Complex64 {
        let n = self.n;
        let offset = offset % n;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, ph) in phases.iter().enumerate() {
            acc += ph * self.unit_roots[(offset * j) % n];
        }
        acc / n as f64
    }

    /// Single amplitude `<offset| e^{i s t A} |0>`, O(n).
    pub fn amplitude(&self, offset: usize, t: f64, scale: TimeScale) -> Complex64 {
        self.amplitude_from_phases(&self.phases(t, scale), offset)
    }
}

pub fn eigenphases(spec: &CycleSpec) -> EigenphaseTable {
    let n = spec.n();
    // evaluate at min(j, n-j) so that lambda_j == lambda_{n-j} bit for bit
    let lambdas = (0..n)
        .map(|j| (TAU * j.min(n - j) as f64 / n as f64).cos())
        .collect();
    let unit_roots = (0..n)
        .map(|j| {
            if j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, TAU * j as f64 / n as f64)
            }
        })
        .collect();
    EigenphaseTable {
        n,
        lambdas,
        unit_roots,
    }
}

/// Column of `e^{i s t A}` for source vertex `p` on a single cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    pub entries: Vec<Complex64>,
    pub t: f64,
    pub source: usize,
    pub scale: TimeScale,
}

impl AmplitudeVector {
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.norm_sqr()).collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(invalid(format!("time must be finite, got {t}")));
    }
    Ok(())
}

pub fn cycle_amplitude(
    spec: &CycleSpec,
    p: usize,
    t: f64,
    scale: TimeScale,
) -> Result<AmplitudeVector> {
    check_time(t)?;
    let n = spec.n();
    if p >= n {
        return Err(invalid(format!("source {p} outside Z_{n}")));
    }
    let table = eigenphases(spec);
    let phases = table.phases(t, scale);
    let entries = (0..n)
        .map(|q| table.amplitude_from_phases(&phases, (q + n - p) % n))
        .collect();
    Ok(AmplitudeVector {
        entries,
        t,
        source: p,
        scale,
    })
}

/// Amplitudes `<q| e^{i A' t} |p>` over the whole lattice (row-major order),
/// where `A' = (1/d) sum_k H_k`.
pub fn product_amplitude(lattice: &LatticeSpec, p: &[usize], t: f64) -> Result<Vec<Complex64>> {
    check_time(t)?;
    lattice.ensure_dense()?;
    if p.len() != lattice.dimension() {
        return Err(invalid(format!(
            "source has {} coordinates, lattice has {}",
            p.len(),
            lattice.dimension()
        )));
    }
    let scale = TimeScale::for_dimension(lattice.dimension());
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for (cycle, &pk) in lattice.cycles().zip(p) {
        let factor = cycle_amplitude(&cycle, pk, t, scale)?;
        out = out
            .iter()
            .flat_map(|a| factor.entries.iter().map(move |b| a * b))
            .collect();
    }
    Ok(out)
}

/// Per-factor probabilities `|<l_k| e^{i t A_k / d} |0>|^2`, one vector per cycle.
pub fn factor_probabilities(lattice: &LatticeSpec, t: f64) -> Result<Vec<Vec<f64>>> {
    check_time(t)?;
    let scale = TimeScale::for_dimension(lattice.dimension());
    lattice
        .cycles()
        .map(|c| cycle_amplitude(&c, 0, t, scale).map(|a| a.probabilities()))
        .collect()
}

/// Outer product of per-factor vectors in row-major lattice order.
pub(crate) fn outer_product(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        out = out
            .iter()
            .flat_map(|a| f.iter().map(move |b| a * b))
            .collect();
    }
    out
}

/// `1 - max` over non-trivial eigenvalues `(1/d) sum_k lambda^{(k)}_{j_k}` of
/// the normalized lattice adjacency matrix.
pub fn spectral_gap(lattice: &LatticeSpec) -> f64 {
    let d = lattice.dimension() as f64;
    // the runner-up eigenvalue moves exactly one coordinate to j = 1
    let second = lattice
        .dims()
        .iter()
        .map(|&n| (d - 1.0 + (TAU / n as f64).cos()) / d)
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 - second
}

/// Eigenvalue classes of a cycle: class 0 is `{0}`, class `m >= 1` is
/// `{m, n - m}` (a single index when `2m = n`).
///
/// With `b_m(l) = sum_{j in class m} w^{l j}` (real),
/// `n <l| e^{i s t A} |0> = sum_m e^{i s t lambda_m} b_m(l)`, so every
/// quadratic quantity reduces to sums over class pairs.
#[derive(Debug, Clone)]
pub struct EigenClasses {
    n: usize,
    lambdas: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl EigenClasses {
    pub fn new(spec: &CycleSpec) -> Self {
        let table = eigenphases(spec);
        let n = spec.n();
        let k = spec.eigenvalue_classes();
        let lambdas = (0..k).map(|m| table.lambdas()[m]).collect();
        let weights = (0..n)
            .map(|l| {
                (0..k)
                    .map(|m| {
                        let w = table.unit_roots()[(l * m) % n].re;
                        if m == 0 || 2 * m == n {
                            w
                        } else {
                            2.0 * w
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            lambdas,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `b_m(l)` for all classes `m`.
    pub fn weights(&self, offset: usize) -> &[f64] {
        &self.weights[offset % self.n]
    }
}
