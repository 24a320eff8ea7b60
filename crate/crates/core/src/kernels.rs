//! Stochastic kernels induced by position measurement.
//!
//! Every kernel on the lattice group is translation invariant, so only the
//! first column (transition probabilities out of vertex 0) is stored. The full
//! matrix entry is `P(p -> q) = first_column[q - p]`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrate::{averaging_factor, simpson_coefficient, simpson_intervals};
use crate::lattice::{CycleSpec, LatticeSpec};
use crate::spectral::{eigenphases, factor_probabilities, outer_product, EigenClasses, TimeScale};

/// Largest quadrature step accepted. Each factor contributes angular
/// frequencies of magnitude at most 1, so the integrand never oscillates faster
/// than 2 rad per unit time.
pub const MAX_QUADRATURE_STEP: f64 = 0.05;

const NEGATIVE_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-9;
const NODES_PER_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    Instant {
        t: f64,
    },
    Averaged {
        horizon: f64,
    },
    ClassicalLazy,
    Power {
        base: Box<KernelKind>,
        exponent: u32,
    },
    Identity,
    Uniform,
}

/// Translation-invariant stochastic kernel on a lattice, stored by first column.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    lattice: LatticeSpec,
    first_column: Vec<f64>,
    kind: KernelKind,
}

impl Kernel {
    /// Validates and clips a first column: entries `>= -1e-12` (negatives are
    /// clipped to zero) and total mass within `1e-9` of one.
    pub fn from_first_column(
        lattice: LatticeSpec,
        column: Vec<f64>,
        kind: KernelKind,
    ) -> Result<Self> {
        Self::with_tolerance(lattice, column, kind, SUM_TOL)
    }

    fn with_tolerance(
        lattice: LatticeSpec,
        mut column: Vec<f64>,
        kind: KernelKind,
        sum_tol: f64,
    ) -> Result<Self> {
        if column.len() != lattice.len() {
            return Err(Error::LengthMismatch {
                left: column.len(),
                right: lattice.len(),
            });
        }
        if let Some(bad) = column
            .iter()
            .find(|x| !x.is_finite() || **x < -NEGATIVE_TOL)
        {
            return Err(invalid(format!("kernel entry {bad} is not a probability")));
        }
        let total: f64 = column.iter().sum();
        if (total - 1.0).abs() > sum_tol {
            return Err(invalid(format!("kernel column sums to {total}")));
        }
        for x in &mut column {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        Ok(Self {
            lattice,
            first_column: column,
            kind,
        })
    }

    pub fn identity(lattice: &LatticeSpec) -> Self {
        let mut column = vec![0.0; lattice.len()];
        column[0] = 1.0;
        Self {
            lattice: lattice.clone(),
            first_column: column,
            kind: KernelKind::Identity,
        }
    }

    pub fn uniform(lattice: &LatticeSpec) -> Self {
        let n = lattice.len();
        Self {
            lattice: lattice.clone(),
            first_column: vec![1.0 / n as f64; n],
            kind: KernelKind::Uniform,
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.first_column.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_column.is_empty()
    }

    /// `P(from -> to)`.
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.first_column[self.lattice.sub_index(to, from)]
    }

    /// Distribution after one step from vertex `source`.
    pub fn column(&self, source: usize) -> Vec<f64> {
        (0..self.len()).map(|q| self.entry(source, q)).collect()
    }

    /// All columns; `O(N^2)` memory, meant for small lattices and tests.
    pub fn dense_columns(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|p| self.column(p)).collect()
    }

    /// Push a distribution through the kernel (group convolution).
    pub fn propagate(&self, dist: &[f64]) -> Result<Vec<f64>> {
        if dist.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: dist.len(),
                right: self.len(),
            });
        }
        Ok(convolve(&self.lattice, &self.first_column, dist))
    }

    /// The kernel of "apply `self`, then `other`".
    pub fn compose(&self, other: &Kernel) -> Result<Kernel> {
        if self.lattice != other.lattice {
            return Err(invalid("kernels live on different lattices"));
        }
        Ok(Kernel {
            lattice: self.lattice.clone(),
            first_column: convolve(&self.lattice, &self.first_column, &other.first_column),
            kind: self.kind.clone(),
        })
    }
}

/// `out[k] = sum_i a[i] b[k - i]` over the lattice group.
pub(crate) fn convolve(lattice: &LatticeSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = lattice.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[lattice.add_index(i, j)] += ai * bj;
        }
    }
    out
}

/// One `(j, k)` term of `n^2 |<l| e^{i s t A} |0>|^2 = sum_{j,k} coeff e^{i omega t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTerm {
    pub omega: f64,
    pub coeff: Complex64,
    pub indices: (usize, usize),
}

/// Full `n^2`-term expansion of `n^2 |<offset| e^{i s t A} |0>|^2` with
/// `omega = s (lambda_j - lambda_k)` and `coeff = w^{offset (j - k)}`.
pub fn frequency_terms(cycle: &CycleSpec, scale: TimeScale, offset: usize) -> Vec<FrequencyTerm> {
    let table = eigenphases(cycle);
    let n = cycle.n();
    let lam = table.lambdas();
    let mut terms = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            terms.push(FrequencyTerm {
                omega: scale.factor() * (lam[j] - lam[k]),
                coeff: table.root(offset as i64 * (j as i64 - k as i64)),
                indices: (j, k),
            });
        }
    }
    terms
}

/// `P_t(0, l) = |<l| e^{i A' t} |0>|^2`.
pub fn instantaneous_kernel(lattice: &LatticeSpec, t: f64) -> Result<Kernel> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("time must be finite and >= 0, got {t}")));
    }
    lattice.ensure_dense()?;
    let column = outer_product(&factor_probabilities(lattice, t)?);
    Kernel::from_first_column(lattice.clone(), column, KernelKind::Instant { t })
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(invalid(format!(
            "horizon T must be finite and > 0, got {horizon}"
        )));
    }
    Ok(())
}

/// Time-averaged kernel `P_T(0,l) = (1/T) int_0^T |<l| e^{i A' t} |0>|^2 dt`,
/// integrated exactly frequency by frequency.
///
/// Supports `d <= 2` with every `n_i` odd. Writing
/// `n A(l, t) = sum_m e^{i s t lambda_m} b_m(l)` over eigenvalue classes, the
/// `d = 2` entry is
///
/// ```text
/// (n1 n2)^2 P_T(0,l) = sum_{m1,m1'} b_{m1} b_{m1'}(l1)
///                      sum_{m2,m2'} b_{m2} b_{m2'}(l2) g(omega1 + omega2, T)
/// ```
///
/// with `g(omega, T) = (e^{i omega T} - 1)/(i omega T)`. The inner sum is the
/// factor-2 contraction, computed once per factor-1 class pair.
pub fn averaged_kernel_analytic(lattice: &LatticeSpec, horizon: f64) -> Result<Kernel> {
    check_horizon(horizon)?;
    lattice.ensure_dense()?;
    if !lattice.all_odd() {
        return Err(Error::UnsupportedParity(format!(
            "analytic averaging needs odd cycle lengths, got {:?}",
            lattice.dims()
        )));
    }
    let column = match lattice.dimension() {
        1 => averaged_single(lattice.dims()[0], horizon)?,
        2 => averaged_pair(lattice.dims()[0], lattice.dims()[1], horizon)?,
        d => {
            return Err(invalid(format!(
                "analytic averaging supports d <= 2, got d = {d}; use the quadrature kernel"
            )))
        }
    };
    Kernel::from_first_column(lattice.clone(), column, KernelKind::Averaged { horizon })
}

fn check_real(z: Complex64) -> f64 {
    assert!(
        z.im.abs() <= IMAG_TOL,
        "averaged probability has imaginary part {:e}; frequency enumeration is broken",
        z.im
    );
    z.re
}

fn averaged_single(n: usize, horizon: f64) -> Result<Vec<f64>> {
    let classes = EigenClasses::new(&CycleSpec::new(n)?);
    let lam = classes.lambdas();
    let k = classes.len();
    let norm = (n * n) as f64;
    let half: Vec<f64> = (0..k)
        .map(|l| {
            let b = classes.weights(l);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..k {
                for mp in 0..k {
                    let g = if m == mp {
                        Complex64::new(1.0, 0.0)
                    } else {
                        averaging_factor(lam[m] - lam[mp], horizon)
                    };
                    acc += g * (b[m] * b[mp]);
                }
            }
            check_real(acc / norm)
        })
        .collect();
    Ok((0..n).map(|l| half[l.min(n - l)]).collect())
}

fn averaged_pair(n1: usize, n2: usize, horizon: f64) -> Result<Vec<f64>> {
    let scale = TimeScale::HALF.factor();
    let c1 = EigenClasses::new(&CycleSpec::new(n1)?);
    let c2 = EigenClasses::new(&CycleSpec::new(n2)?);
    let (k1, k2) = (c1.len(), c2.len());
    let (lam1, lam2) = (c1.lambdas(), c2.lambdas());

    // factor-2 class pairs with their offset-resolved coefficients, laid out
    // contiguously over l2 for the inner loop
    let mut pairs2 = Vec::with_capacity(k2 * k2);
    let mut coeff2 = Vec::with_capacity(k2 * k2 * k2);
    for m in 0..k2 {
        for mp in 0..k2 {
            pairs2.push((scale * (lam2[m] - lam2[mp]), m == mp));
            for l2 in 0..k2 {
                let b = c2.weights(l2);
                coeff2.push(b[m] * b[mp]);
            }
        }
    }

    let pairs1: Vec<(usize, usize)> = (0..k1)
        .flat_map(|m| (0..k1).map(move |mp| (m, mp)))
        .collect();
    let contractions: Vec<Vec<Complex64>> = pairs1
        .par_iter()
        .map(|&(m1, m1p)| {
            let omega1 = scale * (lam1[m1] - lam1[m1p]);
            let mut acc = vec![Complex64::new(0.0, 0.0); k2];
            for (p2, &(omega2, diag2)) in pairs2.iter().enumerate() {
                let g = if m1 == m1p && diag2 {
                    Complex64::new(1.0, 0.0)
                } else {
                    averaging_factor(omega1 + omega2, horizon)
                };
                let coeffs = &coeff2[p2 * k2..(p2 + 1) * k2];
                for (slot, &c) in acc.iter_mut().zip(coeffs) {
                    *slot += g * c;
                }
            }
            acc
        })
        .collect();

    let norm = ((n1 * n2) as f64).powi(2);
    let mut reduced = vec![0.0; k1 * k2];
    for l1 in 0..k1 {
        let b = c1.weights(l1);
        let mut row = vec![Complex64::new(0.0, 0.0); k2];
        for (&(m1, m1p), contraction) in pairs1.iter().zip(&contractions) {
            let w = b[m1] * b[m1p];
            if w == 0.0 {
                continue;
            }
            for (slot, &c) in row.iter_mut().zip(contraction) {
                *slot += c * w;
            }
        }
        for (l2, z) in row.into_iter().enumerate() {
            reduced[l1 * k2 + l2] = check_real(z / norm);
        }
    }

    let mut column = Vec::with_capacity(n1 * n2);
    for l1 in 0..n1 {
        for l2 in 0..n2 {
            column.push(reduced[l1.min(n1 - l1) * k2 + l2.min(n2 - l2)]);
        }
    }
    Ok(column)
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= MAX_QUADRATURE_STEP) {
        return Err(Error::Resolution {
            dt,
            max: MAX_QUADRATURE_STEP,
        });
    }
    Ok(())
}

/// Composite-Simpson average of instantaneous kernels over `[0, T]` with step
/// at most `dt`. Works for any dimension and parity.
pub fn averaged_kernel_quadrature(lattice: &LatticeSpec, horizon: f64, dt: f64) -> Result<Kernel> {
    check_horizon(horizon)?;
    check_step(dt)?;
    lattice.ensure_dense()?;
    let m = simpson_intervals(horizon, dt);
    let h = horizon / m as f64;
    let blocks: Vec<Vec<f64>> = (0..=m)
        .step_by(NODES_PER_BLOCK)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&start| -> Result<Vec<f64>> {
            let mut acc = vec![0.0; lattice.len()];
            for i in start..(start + NODES_PER_BLOCK).min(m + 1) {
                let w = simpson_coefficient(i, m);
                let col = outer_product(&factor_probabilities(lattice, i as f64 * h)?);
                for (a, c) in acc.iter_mut().zip(col) {
                    *a += w * c;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut column = vec![0.0; lattice.len()];
    for block in blocks {
        for (a, b) in column.iter_mut().zip(block) {
            *a += b;
        }
    }
    let scale = h / 3.0 / horizon;
    for x in &mut column {
        *x *= scale;
    }
    Kernel::with_tolerance(
        lattice.clone(),
        column,
        KernelKind::Averaged { horizon },
        1e-8,
    )
}

/// Averaged probabilities `P_T(0, l)` for a handful of entries by Simpson
/// quadrature, for horizons far too long for [`averaged_kernel_quadrature`].
///
/// Phases advance by complex rotation and are recomputed exactly at the start
/// of every block of nodes.
pub fn averaged_entries_quadrature(
    lattice: &LatticeSpec,
    horizon: f64,
    dt: f64,
    entries: &[usize],
) -> Result<Vec<f64>> {
    check_horizon(horizon)?;
    check_step(dt)?;
    if let Some(&bad) = entries.iter().find(|&&e| e >= lattice.len()) {
        return Err(invalid(format!("entry {bad} outside the lattice")));
    }
    let scale = TimeScale::for_dimension(lattice.dimension()).factor();
    let classes: Vec<EigenClasses> = lattice.cycles().map(|c| EigenClasses::new(&c)).collect();
    let coords: Vec<Vec<usize>> = entries.iter().map(|&e| lattice.coords(e)).collect();
    // distinct offsets needed per factor
    let offsets: Vec<Vec<usize>> = (0..lattice.dimension())
        .map(|k| {
            let mut v: Vec<usize> = coords.iter().map(|c| c[k]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let slot: Vec<Vec<usize>> = coords
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, l)| offsets[k].binary_search(l).expect("offset present"))
                .collect()
        })
        .collect();

    let m = simpson_intervals(horizon, dt);
    let h = horizon / m as f64;
    const BLOCK: usize = 4096;
    let starts: Vec<usize> = (0..=m).step_by(BLOCK).collect();
    let partials: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let t0 = start as f64 * h;
            let mut phasors: Vec<Vec<Complex64>> = classes
                .iter()
                .map(|c| {
                    c.lambdas()
                        .iter()
                        .map(|&l| Complex64::from_polar(1.0, scale * l * t0))
                        .collect()
                })
                .collect();
            let rotations: Vec<Vec<Complex64>> = classes
                .iter()
                .map(|c| {
                    c.lambdas()
                        .iter()
                        .map(|&l| Complex64::from_polar(1.0, scale * l * h))
                        .collect()
                })
                .collect();
            let mut acc = vec![0.0; entries.len()];
            let mut probs: Vec<Vec<f64>> = offsets.iter().map(|o| vec![0.0; o.len()]).collect();
            for i in start..(start + BLOCK).min(m + 1) {
                for k in 0..classes.len() {
                    let inv_n = 1.0 / classes[k].n() as f64;
                    for (p, &l) in probs[k].iter_mut().zip(&offsets[k]) {
                        let amp: Complex64 = phasors[k]
                            .iter()
                            .zip(classes[k].weights(l))
                            .map(|(z, &b)| z * b)
                            .sum();
                        *p = (amp * inv_n).norm_sqr();
                    }
                }
                let w = simpson_coefficient(i, m);
                for (a, s) in acc.iter_mut().zip(&slot) {
                    let prob: f64 = s.iter().enumerate().map(|(k, &j)| probs[k][j]).product();
                    *a += w * prob;
                }
                for (ph, rot) in phasors.iter_mut().zip(&rotations) {
                    for (z, r) in ph.iter_mut().zip(rot) {
                        *z *= r;
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; entries.len()];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Ok(out.into_iter().map(|v| v * h / 3.0 / horizon).collect())
}

/// `k^exponent` by square-and-multiply on first columns.
pub fn kernel_power(k: &Kernel, exponent: i64) -> Result<Kernel> {
    if exponent < 0 {
        return Err(invalid(format!(
            "kernel exponent must be >= 0, got {exponent}"
        )));
    }
    if exponent == 0 {
        return Ok(Kernel::identity(&k.lattice));
    }
    if exponent == 1 {
        return Ok(k.clone());
    }
    let lattice = &k.lattice;
    let mut result: Option<Vec<f64>> = None;
    let mut base = k.first_column.clone();
    let mut e = exponent as u64;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve(lattice, &r, &base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(lattice, &base, &base);
    }
    let column = result.expect("exponent >= 1");
    Kernel::with_tolerance(
        lattice.clone(),
        column,
        KernelKind::Power {
            base: Box::new(k.kind.clone()),
            exponent: exponent as u32,
        },
        SUM_TOL * exponent as f64,
    )
}
