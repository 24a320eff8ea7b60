//! Coordinate-wise walk: evolve one cycle factor at a time with
//! `e^{i A_k t}` and measure, so the state stays a product of per-coordinate
//! distributions.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ExperimentRecord;
use crate::distances::{pairwise_column_distance, prop1_rounds, prop2_bound, Distribution};
use crate::error::{invalid, Error, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::lattice::{CycleSpec, LatticeSpec};
use crate::spectral::{cycle_amplitude, outer_product, TimeScale};
use crate::trig_sums::{BoundMethod, BoundReport};

/// Largest lattice on which the joint walk is also propagated directly.
pub const MAX_DIRECT_VERTICES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "rounds", rename_all = "snake_case")]
pub enum RoundPolicy {
    /// Same number of rounds on every coordinate.
    Fixed(u32),
    /// Per coordinate, the threshold-mixing round count for the measured
    /// contraction `alpha_k = d(Q_k)`.
    Prop1,
}

/// Per-coordinate distributions of the product state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateState {
    pub factors: Vec<Distribution>,
}

impl CoordinateState {
    pub fn at_origin(lattice: &LatticeSpec) -> Self {
        Self {
            factors: lattice
                .dims()
                .iter()
                .map(|&n| Distribution::point(n, 0))
                .collect(),
        }
    }

    pub fn joint(&self) -> Vec<f64> {
        let f: Vec<Vec<f64>> = self.factors.iter().map(|d| d.probs().to_vec()).collect();
        outer_product(&f)
    }

    /// Total variation of the joint product distribution to uniform.
    pub fn joint_tv(&self) -> f64 {
        let joint = self.joint();
        let u = 1.0 / joint.len() as f64;
        0.5 * joint.iter().map(|p| (p - u).abs()).sum::<f64>()
    }
}

/// Measurement kernel `Q(t)` of a single cycle: `|<q| e^{i A t} |p>|^2`.
pub fn cycle_measurement_kernel(n: usize, t: f64) -> Result<Kernel> {
    let cycle = CycleSpec::new(n)?;
    let probs = cycle_amplitude(&cycle, 0, t, TimeScale::FULL)?.probabilities();
    Kernel::from_first_column(LatticeSpec::new(&[n])?, probs, KernelKind::Instant { t })
}

fn tv_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}

/// Lifts a single-coordinate kernel to the lattice.
fn lift(lattice: &LatticeSpec, axis: usize, q: &Kernel) -> Result<Kernel> {
    let factors: Vec<Vec<f64>> = lattice
        .dims()
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            if k == axis {
                q.first_column().to_vec()
            } else {
                Distribution::point(n, 0).probs().to_vec()
            }
        })
        .collect();
    Kernel::from_first_column(lattice.clone(), outer_product(&factors), q.kind().clone())
}

pub fn coordinate_wise_run(
    lattice: &LatticeSpec,
    epsilon: f64,
    times: Option<&[f64]>,
    policy: RoundPolicy,
) -> Result<ExperimentRecord> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let dims = lattice.dims();
    let times: Vec<f64> = match times {
        Some(t) if t.len() != dims.len() => {
            return Err(Error::LengthMismatch {
                left: t.len(),
                right: dims.len(),
            })
        }
        Some(t) => t.to_vec(),
        None => dims.iter().map(|&n| n as f64 / 3.0).collect(),
    };
    let start = Instant::now();
    let mut rec = ExperimentRecord::new(
        "mix-coordinate",
        json!({
            "dims": dims,
            "epsilon": epsilon,
            "times": times,
            "policy": policy,
        }),
    );

    let mut kernels = Vec::with_capacity(dims.len());
    let mut rounds = Vec::with_capacity(dims.len());
    for (k, (&n, &t)) in dims.iter().zip(&times).enumerate() {
        let nf = n as f64;
        if !(t >= nf / 3.0 - 1e-12 && t <= nf / 2.0 + 1e-12) {
            rec.warnings.push(format!(
                "coordinate {k}: t = {t} lies outside [n/3, n/2] = [{}, {}]",
                nf / 3.0,
                nf / 2.0
            ));
        }
        let q = cycle_measurement_kernel(n, t)?;
        let alpha = pairwise_column_distance(&q);
        rec.values.insert(format!("alpha_{k}"), alpha);
        let r = match policy {
            RoundPolicy::Fixed(r) => r,
            RoundPolicy::Prop1 if alpha <= 0.0 => 1,
            RoundPolicy::Prop1 => prop1_rounds(alpha).map_err(|_| {
                Error::Hypothesis(format!(
                    "coordinate {k}: measured contraction {alpha} is not below 1"
                ))
            })?,
        };
        rec.values.insert(format!("rounds_{k}"), r as f64);
        kernels.push(q);
        rounds.push(r);
    }

    // exact propagation along the timeline: coordinate 0 for all its rounds,
    // then coordinate 1, and so on
    let mut state = CoordinateState::at_origin(lattice);
    let mut clock = 0.0;
    rec.times.push(clock);
    rec.distances.push(state.joint_tv());
    for (k, (q, &r)) in kernels.iter().zip(&rounds).enumerate() {
        let mut curve = vec![tv_to_uniform(state.factors[k].probs())];
        for _ in 0..r {
            let next = q.propagate(state.factors[k].probs())?;
            state.factors[k] = Distribution::new(next)?;
            clock += times[k];
            curve.push(tv_to_uniform(state.factors[k].probs()));
            rec.times.push(clock);
            rec.distances.push(state.joint_tv());
        }
        rec.values
            .insert(format!("tv_factor_{k}"), *curve.last().unwrap());
        rec.series.insert(format!("tv_factor_{k}"), curve);
    }
    let joint_tv = state.joint_tv();
    rec.values.insert("tv_joint".into(), joint_tv);
    rec.values.insert("total_time".into(), clock);

    let product_bound = 1.0
        - dims
            .iter()
            .enumerate()
            .map(|(k, _)| 1.0 - rec.values[&format!("tv_factor_{k}")])
            .product::<f64>();
    rec.bounds.push(BoundReport::new(
        "joint_tv_product_bound",
        vec![],
        joint_tv,
        product_bound + 1e-12,
        BoundMethod::Analytic,
    ));
    rec.bounds.push(BoundReport::new(
        "joint_tv_epsilon",
        vec![("epsilon".into(), epsilon)],
        joint_tv,
        epsilon,
        BoundMethod::Analytic,
    ));

    if lattice.len() <= MAX_DIRECT_VERTICES {
        let mut dist = vec![0.0; lattice.len()];
        dist[0] = 1.0;
        for (k, (q, &r)) in kernels.iter().zip(&rounds).enumerate() {
            let lifted = lift(lattice, k, q)?;
            for _ in 0..r {
                dist = lifted.propagate(&dist)?;
            }
        }
        let direct = tv_to_uniform(&dist);
        rec.values.insert("tv_joint_direct".into(), direct);
        rec.verdicts.insert(
            "factor_route_matches_direct".into(),
            (direct - joint_tv).abs() <= 1e-12,
        );
    }
    rec.wall_clock = Some(start.elapsed());
    Ok(rec)
}

/// How much of a single-cycle measurement column sits well above zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub n: usize,
    pub t: f64,
    /// `n` times the `ceil(2n/3)`-th largest column entry.
    pub c: f64,
    /// `ceil(2n/3) / n`.
    pub beta: f64,
    /// Fraction of entries `>= c/n` (at least `beta` by construction).
    pub fraction: f64,
    /// Contraction bound implied by `beta` and `gamma = c`.
    pub prop2_bound: f64,
    /// Measured `d(Q(t))`.
    pub measured: f64,
}

pub fn two_thirds_mass(n: usize, t: f64) -> Result<MassReport> {
    let q = cycle_measurement_kernel(n, t)?;
    let mut sorted = q.first_column().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let r = (2 * n).div_ceil(3);
    let c = n as f64 * sorted[r - 1];
    let threshold = sorted[r - 1];
    let count = q.first_column().iter().filter(|&&p| p >= threshold).count();
    let beta = r as f64 / n as f64;
    let prop2 = if c > 0.0 { prop2_bound(beta, c)? } else { 1.0 };
    Ok(MassReport {
        n,
        t,
        c,
        beta,
        fraction: count as f64 / n as f64,
        prop2_bound: prop2,
        measured: pairwise_column_distance(&q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_mixes() {
        let l = LatticeSpec::new(&[3]).unwrap();
        let rec = coordinate_wise_run(&l, 0.01, Some(&[1.0]), RoundPolicy::Fixed(40)).unwrap();
        assert!(rec.value("tv_joint").unwrap() < 1e-6);
        assert!(rec.distances.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn out_of_interval_time_warns() {
        let l = LatticeSpec::new(&[9]).unwrap();
        let rec = coordinate_wise_run(&l, 0.1, Some(&[1.0]), RoundPolicy::Fixed(1)).unwrap();
        assert_eq!(rec.warnings.len(), 1);
        let rec = coordinate_wise_run(&l, 0.1, None, RoundPolicy::Fixed(1)).unwrap();
        assert!(rec.warnings.is_empty());
    }

    #[test]
    fn mismatched_times_rejected() {
        let l = LatticeSpec::new(&[9, 5]).unwrap();
        assert!(coordinate_wise_run(&l, 0.1, Some(&[3.0]), RoundPolicy::Prop1).is_err());
        assert!(coordinate_wise_run(&l, 1.0, None, RoundPolicy::Prop1).is_err());
    }

    #[test]
    fn mass_report_is_consistent() {
        let m = two_thirds_mass(19, 19.0 / 3.0).unwrap();
        assert!(m.c > 0.0);
        assert!(m.fraction >= 2.0 / 3.0);
        assert!(m.measured <= m.prop2_bound + 1e-12);
    }
}
