//! One function per subcommand, each turning a resolved configuration into an
//! [`Artifact`].

use std::f64::consts::E;

use anyhow::{bail, Result};
use serde_json::json;

use qwalk_core::classical::{classical_mixing_curve, coupling_simulation, theorem1_bound};
use qwalk_core::distances::{distance_to_uniform, pairwise_column_distance};
use qwalk_core::experiments::algorithm1::averaged_kernel;
use qwalk_core::experiments::{
    algorithm1_run, coordinate_wise_run, fig1_experiment, theorem3_case_check, Algorithm1Mode,
    RoundPolicy,
};
use qwalk_core::kernels::averaged_kernel_quadrature;
use qwalk_core::spectral::{eigenphases, spectral_gap};
use qwalk_core::trig_sums::{
    conjecture_sweep, lemma2_report, linear_grid, odd_coprime_pairs, sample_pairs, TrigSumParams,
};
use qwalk_core::LatticeSpec;

use crate::config::{Mode, RunConfig};
use crate::output::{Artifact, Cell, Chart, Table};

/// Largest relative change allowed when the conjecture step is halved.
pub const REFINEMENT_TOL: f64 = 1e-5;

pub fn run(config: &RunConfig) -> Result<Artifact> {
    match config.subcommand.as_str() {
        "spectrum" => spectrum(config),
        "kernel" => kernel(config),
        "mix-classical" => mix_classical(config),
        "mix-coordinate" => mix_coordinate(config),
        "mix-repeated" => mix_repeated(config),
        "lemma2" => lemma2(config),
        "conjecture" => conjecture(config),
        "theorem3" => theorem3(config),
        "fig1" => fig1(config),
        other => bail!("unknown subcommand {other}"),
    }
}

fn lattice(config: &RunConfig) -> Result<LatticeSpec> {
    Ok(LatticeSpec::new(config.dims())?)
}

fn pair(config: &RunConfig) -> Result<(usize, usize)> {
    match config.dims() {
        &[a, b] => Ok((a, b)),
        other => bail!(
            "{} needs exactly two cycle lengths, got {other:?}",
            config.subcommand
        ),
    }
}

fn spectrum(config: &RunConfig) -> Result<Artifact> {
    let lattice = lattice(config)?;
    let mut table = Table::new(&["factor", "n", "j", "lambda"]);
    let mut factors = Vec::new();
    for (k, cycle) in lattice.cycles().enumerate() {
        let table_k = eigenphases(&cycle);
        for (j, &lam) in table_k.lambdas().iter().enumerate() {
            table.push(vec![k.into(), cycle.n().into(), j.into(), lam.into()]);
        }
        factors.push(json!({ "n": cycle.n(), "lambdas": table_k.lambdas() }));
    }
    let gap = spectral_gap(&lattice);
    Ok(Artifact {
        table,
        json: json!({ "dims": lattice.dims(), "spectral_gap": gap, "factors": factors }),
        chart: None,
        violation: false,
        summary: vec![format!("spectral gap {gap:.6e}")],
    })
}

fn kernel(config: &RunConfig) -> Result<Artifact> {
    let lattice = lattice(config)?;
    let horizon = config.flags.horizon.expect("defaulted");
    let dt = config.flags.dt.expect("defaulted");
    let k = if lattice.all_odd() && lattice.dimension() <= 2 {
        averaged_kernel(&lattice, horizon)?
    } else {
        averaged_kernel_quadrature(&lattice, horizon, dt.min(0.05))?
    };
    let mut header = vec!["vertex".to_string()];
    header.extend((0..lattice.dimension()).map(|i| format!("x{i}")));
    header.push("probability".into());
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for (v, &p) in k.first_column().iter().enumerate() {
        let mut row: Vec<Cell> = vec![v.into()];
        row.extend(lattice.coords(v).into_iter().map(Cell::from));
        row.push(p.into());
        table.push(row);
    }
    let tv = distance_to_uniform(&k);
    let d = pairwise_column_distance(&k);
    Ok(Artifact {
        table,
        json: json!({
            "dims": lattice.dims(),
            "T": horizon,
            "first_column": k.first_column(),
            "tv_to_uniform": tv,
            "pairwise_distance": d,
        }),
        chart: None,
        violation: false,
        summary: vec![format!("tv to uniform {tv:.6e}, d(P_T) {d:.6e}")],
    })
}

fn mix_classical(config: &RunConfig) -> Result<Artifact> {
    let lattice = lattice(config)?;
    let f = &config.flags;
    let eps = f.epsilon.expect("defaulted");
    let bound = theorem1_bound(&lattice, eps)?;
    let t_max = f.t_max.map(|t| t as u64).unwrap_or(bound).max(bound);
    let curve = classical_mixing_curve(&lattice, t_max)?;
    let tv_at_bound = curve[bound as usize].1;
    let coupling = coupling_simulation(
        &lattice,
        f.trajectories.expect("defaulted"),
        f.seed.expect("defaulted"),
    )?;

    let mut table = Table::new(&["t", "tv"]);
    for &(t, tv) in &curve {
        table.push(vec![t.into(), tv.into()]);
    }
    let coupling_ok = coupling
        .mean_tau
        .iter()
        .zip(&coupling.stderr_tau)
        .zip(&coupling.bound)
        .all(|((m, se), b)| *m <= b + 3.0 * se);
    let mixed = tv_at_bound <= eps;
    let mut summary = vec![format!(
        "tv at t = {bound}: {tv_at_bound:.6e} (epsilon {eps})"
    )];
    for (k, (m, b)) in coupling.mean_tau.iter().zip(&coupling.bound).enumerate() {
        summary.push(format!(
            "coordinate {k}: mean coupling time {m:.2} vs d n^2/4 = {b}"
        ));
    }
    Ok(Artifact {
        table,
        json: json!({
            "dims": lattice.dims(),
            "epsilon": eps,
            "mixing_bound": bound,
            "tv_at_bound": tv_at_bound,
            "mixed_at_bound": mixed,
            "coupling": coupling,
            "coupling_within_bound": coupling_ok,
            "curve": curve.iter().map(|&(t, tv)| json!([t, tv])).collect::<Vec<_>>(),
        }),
        chart: Some(Chart {
            title: format!("lazy walk on {:?}", lattice.dims()),
            x_label: "t".into(),
            y_label: "tv to uniform".into(),
            x: curve.iter().map(|&(t, _)| t as f64).collect(),
            series: vec![
                ("tv".into(), curve.iter().map(|&(_, v)| v).collect()),
                ("epsilon".into(), vec![eps; curve.len()]),
            ],
        }),
        violation: !(mixed && coupling_ok),
        summary,
    })
}

fn mix_coordinate(config: &RunConfig) -> Result<Artifact> {
    let lattice = lattice(config)?;
    let f = &config.flags;
    let policy = f
        .rounds
        .map(RoundPolicy::Fixed)
        .unwrap_or(RoundPolicy::Prop1);
    let rec = coordinate_wise_run(
        &lattice,
        f.epsilon.expect("defaulted"),
        f.times.as_deref(),
        policy,
    )?;
    let mut table = Table::new(&["step", "time", "joint_tv"]);
    for (i, (t, d)) in rec.times.iter().zip(&rec.distances).enumerate() {
        table.push(vec![i.into(), (*t).into(), (*d).into()]);
    }
    let mut summary = vec![format!(
        "joint tv {:.6e}",
        rec.value("tv_joint").unwrap_or(f64::NAN)
    )];
    summary.extend(rec.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Artifact {
        table,
        json: serde_json::to_value(&rec)?,
        chart: Some(Chart {
            title: format!("coordinate-wise walk on {:?}", lattice.dims()),
            x_label: "evolution time".into(),
            y_label: "joint tv to uniform".into(),
            x: rec.times.clone(),
            series: vec![("joint_tv".into(), rec.distances.clone())],
        }),
        violation: !rec.passed(),
        summary,
    })
}

fn mix_repeated(config: &RunConfig) -> Result<Artifact> {
    let lattice = lattice(config)?;
    let f = &config.flags;
    let mode = match f.mode.expect("defaulted") {
        Mode::Exact => Algorithm1Mode::Exact,
        Mode::Sampled => Algorithm1Mode::Sampled {
            trajectories: f.trajectories.expect("defaulted"),
        },
    };
    let rec = algorithm1_run(
        &lattice,
        f.horizon.expect("defaulted"),
        f.rounds.expect("defaulted"),
        mode,
        f.seed.expect("defaulted"),
    )?;
    let mut table = Table::new(&[
        "round",
        "tv",
        "pairwise_distance",
        "submultiplicative_bound",
    ]);
    let pairwise = &rec.series["pairwise_distance"];
    for (i, b) in rec.bounds.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            rec.distances[i].into(),
            pairwise[i].into(),
            b.rhs.into(),
        ]);
    }
    let mut summary = vec![
        format!("d(P_T) {:.6e}", rec.value("d_PT").unwrap_or(f64::NAN)),
        format!(
            "tv after final round {:.6e}",
            rec.value("tv_final").unwrap_or(f64::NAN)
        ),
    ];
    if let Some(tv) = rec.value("tv_sampled_vs_exact") {
        summary.push(format!("sampled vs exact tv {tv:.4e}"));
    }
    Ok(Artifact {
        table,
        json: serde_json::to_value(&rec)?,
        chart: Some(Chart {
            title: format!("repeated measurement on {:?}", lattice.dims()),
            x_label: "round".into(),
            y_label: "distance".into(),
            x: rec.times.clone(),
            series: vec![
                ("tv".into(), rec.distances.clone()),
                ("pairwise_distance".into(), pairwise.clone()),
            ],
        }),
        violation: !rec.passed(),
        summary,
    })
}

fn lemma2(config: &RunConfig) -> Result<Artifact> {
    let f = &config.flags;
    let n = f.n.expect("defaulted");
    let horizon = f.horizon.expect("defaulted");
    let reports = f
        .offsets
        .as_deref()
        .expect("defaulted")
        .iter()
        .map(|&l| lemma2_report(&TrigSumParams::new(n, l, horizon)?))
        .collect::<qwalk_core::Result<Vec<_>>>()?;
    let worst = reports
        .iter()
        .max_by(|a, b| a.lhs.total_cmp(&b.lhs))
        .expect("at least one offset");
    let mut table = Table::new(&["n", "offset", "T", "lhs", "rhs", "satisfied"]);
    for r in &reports {
        table.push(vec![
            n.into(),
            (r.param("offset").unwrap_or(0.0) as usize).into(),
            horizon.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.satisfied.into(),
        ]);
    }
    let all = reports.iter().all(|r| r.satisfied);
    Ok(Artifact {
        table,
        json: json!({
            "n": n,
            "T": horizon,
            "lhs": worst.lhs,
            "rhs": worst.rhs,
            "satisfied": all,
            "method": worst.method,
            "reports": reports,
        }),
        chart: None,
        violation: !all,
        summary: vec![format!(
            "|integral| {:.6e} vs bound {:.6e}",
            worst.lhs, worst.rhs
        )],
    })
}

fn conjecture(config: &RunConfig) -> Result<Artifact> {
    let f = &config.flags;
    let (lo, hi) = match f.range.as_deref() {
        Some(&[lo, hi]) if lo <= hi => (lo, hi),
        other => bail!("--range needs lo,hi with lo <= hi, got {other:?}"),
    };
    let offsets = f.offsets.clone().expect("defaulted");
    if offsets.is_empty() {
        bail!("--offsets must not be empty");
    }
    let available = odd_coprime_pairs(lo, hi).len();
    let pairs = match f.pairs {
        Some(k) => sample_pairs(lo, hi, k, f.seed.expect("defaulted"))?,
        None => odd_coprime_pairs(lo, hi),
    };
    let points = f.t_points.expect("defaulted");
    if points == 0 {
        bail!("--T-points must be positive");
    }
    let grid = linear_grid(f.t_max.expect("defaulted"), points);
    let reports = conjecture_sweep(&pairs, &grid, f.dt.expect("defaulted"), &offsets, true)?;

    let multi = offsets.len() > 1;
    let mut header = vec!["n1", "n2", "T", "lhs", "rhs", "satisfied"];
    if multi {
        header.push("offset");
    }
    let mut table = Table::new(&header);
    let mut max_ratio: f64 = 0.0;
    let mut max_refinement: f64 = 0.0;
    for r in &reports {
        let p = |k: &str| r.param(k).expect("sweep parameter");
        let mut row: Vec<Cell> = vec![
            (p("n1") as usize).into(),
            (p("n2") as usize).into(),
            p("T").into(),
            r.lhs.into(),
            r.rhs.into(),
            r.satisfied.into(),
        ];
        if multi {
            row.push((p("offset") as usize).into());
        }
        table.push(row);
        max_ratio = max_ratio.max(r.lhs / r.rhs);
        max_refinement = max_refinement.max(r.refinement.unwrap_or(0.0));
    }
    let violations = reports.iter().filter(|r| !r.satisfied).count();
    let converged = max_refinement <= REFINEMENT_TOL;
    Ok(Artifact {
        table,
        json: json!({
            "range": [lo, hi],
            "pairs_in_range": available,
            "pairs": pairs,
            "offsets": offsets,
            "T_grid": grid,
            "rows": reports.len(),
            "violations": violations,
            "max_ratio": max_ratio,
            "max_refinement": max_refinement,
            "refinement_tolerance": REFINEMENT_TOL,
            "reports": reports,
        }),
        chart: Some(Chart {
            title: format!("product integral vs bound, {} pairs", pairs.len()),
            x_label: "row".into(),
            y_label: "value".into(),
            x: (0..reports.len()).map(|i| i as f64).collect(),
            series: vec![
                ("lhs".into(), reports.iter().map(|r| r.lhs).collect()),
                ("rhs".into(), reports.iter().map(|r| r.rhs).collect()),
            ],
        }),
        violation: violations > 0 || !converged,
        summary: vec![
            format!(
                "{} pairs sampled from {available} in [{lo}, {hi}]",
                pairs.len()
            ),
            format!(
                "{} rows, {violations} violations, max lhs/rhs {max_ratio:.4e}",
                reports.len()
            ),
            format!("max relative change under step halving {max_refinement:.3e}"),
        ],
    })
}

fn theorem3(config: &RunConfig) -> Result<Artifact> {
    let (n1, n2) = pair(config)?;
    let out = theorem3_case_check(n1, n2, !config.flags.relaxed)?;
    let mut table = Table::new(&["label", "lhs", "rhs", "satisfied"]);
    for r in &out.reports {
        table.push(vec![
            r.label.as_str().into(),
            r.lhs.into(),
            r.rhs.into(),
            r.satisfied.into(),
        ]);
    }
    let summary = out
        .reports
        .iter()
        .map(|r| {
            format!(
                "{}: {:.6e} <= {:.6e} {}",
                r.label,
                r.lhs,
                r.rhs,
                if r.satisfied { "ok" } else { "VIOLATED" }
            )
        })
        .chain(std::iter::once(format!("1/(2e) = {:.6e}", 1.0 / (2.0 * E))))
        .collect();
    Ok(Artifact {
        table,
        json: serde_json::to_value(&out)?,
        chart: None,
        violation: out.asserted && !out.all_satisfied(),
        summary,
    })
}

fn fig1(config: &RunConfig) -> Result<Artifact> {
    let (n1, n2) = pair(config)?;
    let t_max = config.flags.t_max.expect("defaulted");
    if t_max.is_nan() || t_max < 1.0 {
        bail!("--T-max must be at least 1, got {t_max}");
    }
    let rec = fig1_experiment(n1, n2, Some(t_max as u64))?;
    let mut table = Table::new(&["T", "quantum_return", "classical_return", "uniform_level"]);
    let q = &rec.series["quantum_return"];
    let c = &rec.series["classical_return"];
    let u = &rec.series["uniform_level"];
    for (i, t) in rec.times.iter().enumerate() {
        table.push(vec![
            (*t as u64).into(),
            q[i].into(),
            c[i].into(),
            u[i].into(),
        ]);
    }
    let v = |k: &str| rec.value(k).unwrap_or(f64::NAN);
    Ok(Artifact {
        table,
        json: serde_json::to_value(&rec)?,
        chart: Some(Chart {
            title: format!("return probability on Z{n1} x Z{n2}"),
            x_label: "T".into(),
            y_label: "time-averaged return probability".into(),
            x: rec.times.clone(),
            series: vec![
                ("quantum".into(), q.clone()),
                ("classical (lazy)".into(), c.clone()),
                ("uniform".into(), u.clone()),
            ],
        }),
        violation: !rec.passed(),
        summary: vec![
            format!("uniform level {:.6e}", v("uniform_level")),
            format!(
                "at T = {}: quantum {:.6e}, classical {:.6e}",
                v("quantum_marker"),
                v("quantum_at_marker"),
                v("classical_at_marker")
            ),
            format!(
                "classical tv at t = {}: {:.6e}",
                v("classical_marker"),
                v("classical_tv_at_classical_marker")
            ),
        ],
    })
}
