//! Return probability to the start vertex: quantum time average against the
//! classical lazy walk's running average.

use std::time::Instant;

use serde_json::json;

use super::ExperimentRecord;
use crate::classical::{classical_mixing_curve, lazy_return_probabilities};
use crate::error::{invalid, Result};
use crate::kernels::{averaged_entries_quadrature, averaged_kernel_analytic};
use crate::lattice::LatticeSpec;

const QUADRATURE_STEP: f64 = 0.02;

/// Time-averaged quantum return probability `P_T(0, 0)`.
pub fn quantum_return(lattice: &LatticeSpec, horizon: f64) -> Result<f64> {
    if horizon == 0.0 {
        return Ok(1.0);
    }
    if lattice.all_odd() && lattice.dimension() <= 2 {
        Ok(averaged_kernel_analytic(lattice, horizon)?.first_column()[0])
    } else {
        Ok(averaged_entries_quadrature(lattice, horizon, QUADRATURE_STEP, &[0])?[0])
    }
}

/// `(1/(T+1)) sum_{s=0}^{T} P^s(0, 0)` for `T = 0..=t_max`.
pub fn classical_running_return(lattice: &LatticeSpec, t_max: u64) -> Result<Vec<f64>> {
    let r = lazy_return_probabilities(lattice, t_max)?;
    let mut acc = 0.0;
    Ok(r.iter()
        .enumerate()
        .map(|(i, p)| {
            acc += p;
            acc / (i + 1) as f64
        })
        .collect())
}

/// Both curves on the integer grid `0..=t_max` (default `4 (n1 + n2)`),
/// plus the checks at the quantum marker `n1 + n2` and the classical marker
/// `n1^2 + n2^2`.
pub fn fig1_experiment(n1: usize, n2: usize, t_max: Option<u64>) -> Result<ExperimentRecord> {
    let lattice = LatticeSpec::new(&[n1, n2])?;
    let quantum_marker = (n1 + n2) as u64;
    let classical_marker = (n1 * n1 + n2 * n2) as u64;
    let t_max = t_max.unwrap_or(4 * quantum_marker);
    if t_max == 0 {
        return Err(invalid("T-max must be positive"));
    }
    let start = Instant::now();
    let mut rec = ExperimentRecord::new("fig1", json!({ "dims": [n1, n2], "T_max": t_max }));
    let uniform = 1.0 / (n1 * n2) as f64;

    let quantum: Vec<f64> = (0..=t_max)
        .map(|t| quantum_return(&lattice, t as f64))
        .collect::<Result<_>>()?;
    let classical = classical_running_return(&lattice, t_max.max(quantum_marker))?;

    rec.times = (0..=t_max).map(|t| t as f64).collect();
    rec.distances = quantum.iter().map(|q| (q - uniform).abs()).collect();
    rec.series.insert("quantum_return".into(), quantum);
    rec.series.insert(
        "classical_return".into(),
        classical[..=t_max as usize].to_vec(),
    );
    rec.series
        .insert("uniform_level".into(), vec![uniform; t_max as usize + 1]);

    let q_at = quantum_return(&lattice, quantum_marker as f64)?;
    let c_at = classical[quantum_marker as usize];
    let tv_curve = classical_mixing_curve(&lattice, classical_marker)?;
    let tv_at = tv_curve.last().expect("non-empty curve").1;

    rec.values.insert("uniform_level".into(), uniform);
    rec.values
        .insert("quantum_marker".into(), quantum_marker as f64);
    rec.values
        .insert("classical_marker".into(), classical_marker as f64);
    rec.values.insert("quantum_at_marker".into(), q_at);
    rec.values.insert("classical_at_marker".into(), c_at);
    rec.values
        .insert("classical_tv_at_classical_marker".into(), tv_at);

    let q_dev = (q_at - uniform).abs();
    let c_dev = (c_at - uniform).abs();
    rec.verdicts.insert(
        "quantum_near_uniform".into(),
        q_dev <= 0.1 * (1.0 - uniform),
    );
    rec.verdicts
        .insert("quantum_closer_than_classical".into(), c_dev > q_dev);
    rec.verdicts
        .insert("classical_mixed_at_marker".into(), tv_at <= 0.1);
    rec.wall_clock = Some(start.elapsed());
    Ok(rec)
}
