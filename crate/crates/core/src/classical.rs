//! The lazy classical random walk: hold with probability 1/2, otherwise move to
//! one of the `2d` lattice neighbours uniformly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::lattice::LatticeSpec;

/// Dense mixing curves iterate a full distribution; cap its size.
pub const MAX_CURVE_VERTICES: usize = 1_000_000;

pub fn lazy_kernel(lattice: &LatticeSpec) -> Result<Kernel> {
    lattice.ensure_dense()?;
    let mut column = vec![0.0; lattice.len()];
    column[0] = 0.5;
    let d = lattice.dimension();
    let mass = 1.0 / (4 * d) as f64;
    let mut unit = vec![0usize; d];
    for k in 0..d {
        unit[k] = 1;
        let up = lattice.index(&unit);
        column[up] += mass;
        column[lattice.neg_index(up)] += mass;
        unit[k] = 0;
    }
    Kernel::from_first_column(lattice.clone(), column, KernelKind::ClassicalLazy)
}

/// `2 d n_max^2 ceil(ln(d / epsilon))`.
pub fn theorem1_bound(lattice: &LatticeSpec, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    let d = lattice.dimension() as u64;
    let n = lattice.max_dim() as u64;
    let log = (d as f64 / epsilon).ln().ceil() as u64;
    Ok(2 * d * n * n * log)
}

/// One lazy step applied to a distribution, `O(N d)`.
pub fn lazy_step(lattice: &LatticeSpec, dist: &[f64]) -> Vec<f64> {
    let d = lattice.dimension();
    let mass = 1.0 / (4 * d) as f64;
    let dims = lattice.dims();
    // stride of coordinate k in the flat index
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut out: Vec<f64> = dist.iter().map(|p| 0.5 * p).collect();
    for (v, &p) in dist.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for k in 0..d {
            let n = dims[k];
            let c = (v / strides[k]) % n;
            let base = v - c * strides[k];
            out[base + ((c + 1) % n) * strides[k]] += mass * p;
            out[base + ((c + n - 1) % n) * strides[k]] += mass * p;
        }
    }
    out
}

/// Exact total variation to uniform of the lazy walk started at vertex 0,
/// for `t = 0..=t_max`.
pub fn classical_mixing_curve(lattice: &LatticeSpec, t_max: u64) -> Result<Vec<(u64, f64)>> {
    if lattice.len() > MAX_CURVE_VERTICES {
        return Err(Error::Size(format!(
            "{} vertices exceed the curve limit of {MAX_CURVE_VERTICES}",
            lattice.len()
        )));
    }
    let n = lattice.len();
    let u = 1.0 / n as f64;
    let mut dist = vec![0.0; n];
    dist[0] = 1.0;
    let mut curve = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        let tv = 0.5 * dist.iter().map(|p| (p - u).abs()).sum::<f64>();
        curve.push((t, tv));
        if t < t_max {
            dist = lazy_step(lattice, &dist);
        }
    }
    Ok(curve)
}

/// Return probabilities `P^t(0, 0)` of the lazy walk for `t = 0..=t_max`.
pub fn lazy_return_probabilities(lattice: &LatticeSpec, t_max: u64) -> Result<Vec<f64>> {
    lattice.ensure_dense()?;
    let mut dist = vec![0.0; lattice.len()];
    dist[0] = 1.0;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        out.push(dist[0]);
        if t < t_max {
            dist = lazy_step(lattice, &dist);
        }
    }
    Ok(out)
}

/// Per-coordinate coupling times of one trajectory pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingTrajectory {
    pub per_coordinate: Vec<u64>,
    pub couple: u64,
}

/// Empirical coupling times over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub trials: usize,
    pub seed: u64,
    pub mean_tau: Vec<f64>,
    pub stderr_tau: Vec<f64>,
    pub mean_couple: f64,
    pub stderr_couple: f64,
    /// `d n_i^2 / 4` per coordinate.
    pub bound: Vec<f64>,
}

/// Generator for trial `index` under master `seed`: ChaCha8 keyed by the seed,
/// with the trial index selecting the stream.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs the coordinate coupling from `x = 0`, `y = (floor(n_i/2))_i` until
/// every coordinate agrees.
///
/// Each step picks a coordinate uniformly. If the walkers agree there, both
/// move by `+1`, `-1` or `0` with probabilities 1/4, 1/4, 1/2. Otherwise a
/// fair coin picks which walker moves and a second coin picks the direction.
pub fn coupling_trajectory<R: Rng>(lattice: &LatticeSpec, rng: &mut R) -> CouplingTrajectory {
    let dims = lattice.dims();
    let d = dims.len();
    let mut x = vec![0usize; d];
    let mut y: Vec<usize> = dims.iter().map(|n| n / 2).collect();
    let mut tau: Vec<Option<u64>> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (a == b).then_some(0))
        .collect();
    let mut remaining = tau.iter().filter(|t| t.is_none()).count();
    let mut t = 0u64;
    while remaining > 0 {
        t += 1;
        let k = rng.gen_range(0..d);
        let n = dims[k];
        if x[k] == y[k] {
            let u: f64 = rng.gen();
            let step = if u < 0.25 {
                1
            } else if u < 0.5 {
                n - 1
            } else {
                0
            };
            x[k] = (x[k] + step) % n;
            y[k] = x[k];
        } else {
            let step = if rng.gen_bool(0.5) { 1 } else { n - 1 };
            let mover = if rng.gen_bool(0.5) { &mut x } else { &mut y };
            mover[k] = (mover[k] + step) % n;
            if x[k] == y[k] {
                debug_assert!(tau[k].is_none());
                tau[k] = Some(t);
                remaining -= 1;
            }
        }
    }
    let per_coordinate: Vec<u64> = tau.into_iter().map(|t| t.expect("all coupled")).collect();
    let couple = per_coordinate.iter().copied().max().unwrap_or(0);
    CouplingTrajectory {
        per_coordinate,
        couple,
    }
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn coupling_simulation(
    lattice: &LatticeSpec,
    trials: usize,
    seed: u64,
) -> Result<CouplingReport> {
    if trials == 0 {
        return Err(invalid("coupling simulation needs at least one trial"));
    }
    let runs: Vec<CouplingTrajectory> = (0..trials as u64)
        .into_par_iter()
        .map(|i| coupling_trajectory(lattice, &mut trial_rng(seed, i)))
        .collect();
    let d = lattice.dimension();
    let mut mean_tau = Vec::with_capacity(d);
    let mut stderr_tau = Vec::with_capacity(d);
    for k in 0..d {
        let (m, s) = mean_and_stderr(runs.iter().map(|r| r.per_coordinate[k] as f64), trials);
        mean_tau.push(m);
        stderr_tau.push(s);
    }
    let (mean_couple, stderr_couple) =
        mean_and_stderr(runs.iter().map(|r| r.couple as f64), trials);
    let bound = lattice
        .dims()
        .iter()
        .map(|&n| (d * n * n) as f64 / 4.0)
        .collect();
    Ok(CouplingReport {
        trials,
        seed,
        mean_tau,
        stderr_tau,
        mean_couple,
        stderr_couple,
        bound,
    })
}
