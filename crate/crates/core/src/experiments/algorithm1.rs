//! Repeated measurement: evolve for a uniformly random time in `[0, T]`,
//! measure position, repeat `T'` times.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ExperimentRecord;
use crate::classical::trial_rng;
use crate::distances::{distance_to_uniform, pairwise_column_distance, tv_slices};
use crate::error::{invalid, Result};
use crate::kernels::{averaged_kernel_analytic, averaged_kernel_quadrature, kernel_power, Kernel};
use crate::lattice::LatticeSpec;
use crate::spectral::factor_probabilities;
use crate::trig_sums::{BoundMethod, BoundReport};

const FALLBACK_STEP: f64 = 0.02;
const SUBMULT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Algorithm1Mode {
    Exact,
    Sampled { trajectories: usize },
}

/// `P_T`, analytically when the lattice allows it and by quadrature otherwise.
pub fn averaged_kernel(lattice: &LatticeSpec, horizon: f64) -> Result<Kernel> {
    if lattice.all_odd() && lattice.dimension() <= 2 {
        averaged_kernel_analytic(lattice, horizon)
    } else {
        averaged_kernel_quadrature(lattice, horizon, FALLBACK_STEP)
    }
}

fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One trajectory of `rounds` measurement rounds from vertex 0.
pub fn sample_trajectory<R: Rng>(
    lattice: &LatticeSpec,
    horizon: f64,
    rounds: u32,
    rng: &mut R,
) -> Result<usize> {
    let dims = lattice.dims();
    let mut pos = vec![0usize; dims.len()];
    for _ in 0..rounds {
        let t = rng.gen::<f64>() * horizon;
        let probs = factor_probabilities(lattice, t)?;
        for ((x, p), &n) in pos.iter_mut().zip(&probs).zip(dims) {
            *x = (*x + draw(p, rng.gen())) % n;
        }
    }
    Ok(lattice.index(&pos))
}

pub fn algorithm1_run(
    lattice: &LatticeSpec,
    horizon: f64,
    rounds: u32,
    mode: Algorithm1Mode,
    seed: u64,
) -> Result<ExperimentRecord> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid(format!(
            "horizon T must be finite and > 0, got {horizon}"
        )));
    }
    if rounds == 0 {
        return Err(invalid("need at least one measurement round"));
    }
    let start = Instant::now();
    let mut rec = ExperimentRecord::new(
        "algorithm1",
        json!({
            "dims": lattice.dims(),
            "T": horizon,
            "rounds": rounds,
            "mode": mode,
            "seed": seed,
        }),
    );

    let base = averaged_kernel(lattice, horizon)?;
    let d1 = pairwise_column_distance(&base);
    rec.values.insert("d_PT".into(), d1);
    let mut pairwise = Vec::with_capacity(rounds as usize);
    let mut power = base.clone();
    for k in 1..=rounds {
        if k > 1 {
            power = power.compose(&base)?;
        }
        rec.times.push(k as f64);
        rec.distances.push(distance_to_uniform(&power));
        let dk = pairwise_column_distance(&power);
        pairwise.push(dk);
        rec.bounds.push(BoundReport::new(
            "submultiplicativity",
            vec![("k".into(), k as f64)],
            dk,
            d1.powi(k as i32) + SUBMULT_SLACK,
            BoundMethod::Analytic,
        ));
    }
    rec.series.insert("pairwise_distance".into(), pairwise);
    let final_kernel = kernel_power(&base, rounds as i64)?;
    rec.values
        .insert("tv_final".into(), distance_to_uniform(&final_kernel));

    if let Algorithm1Mode::Sampled { trajectories } = mode {
        if trajectories == 0 {
            return Err(invalid("need at least one trajectory"));
        }
        let ends: Vec<usize> = (0..trajectories as u64)
            .into_par_iter()
            .map(|i| sample_trajectory(lattice, horizon, rounds, &mut trial_rng(seed, i)))
            .collect::<Result<_>>()?;
        let mut counts = vec![0u64; lattice.len()];
        for e in ends {
            counts[e] += 1;
        }
        let empirical: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / trajectories as f64)
            .collect();
        let tv = tv_slices(&empirical, final_kernel.first_column());
        let tolerance = (lattice.len() as f64 / trajectories as f64).sqrt();
        rec.values.insert("tv_sampled_vs_exact".into(), tv);
        rec.values.insert("sampling_tolerance".into(), tolerance);
        rec.verdicts
            .insert("sampled_matches_exact".into(), tv <= tolerance);
        rec.series.insert("empirical".into(), empirical);
    }
    rec.series
        .insert("exact".into(), final_kernel.first_column().to_vec());
    rec.wall_clock = Some(start.elapsed());
    Ok(rec)
}

/// Smallest `k` with `d^k <= epsilon`, i.e. `ceil(log_{1/d}(1/epsilon))`.
pub fn rounds_for_accuracy(contraction: f64, epsilon: f64) -> Result<u32> {
    if !(contraction > 0.0 && contraction < 1.0) {
        return Err(invalid(format!(
            "contraction must lie in (0,1), got {contraction}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    Ok(crate::distances::ceil_log(1.0 / epsilon, contraction).max(1))
}
