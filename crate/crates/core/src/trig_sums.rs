//! The oscillatory part of the return probability on an odd cycle and its
//! time integrals.
//!
//! At half time scale (the per-factor scale of a two-dimensional walk),
//!
//! ```text
//! n^2 P_t(0, l) = n + (n I{l=0} - 1) + n(t)
//! n(t) = sum_{j != k, j+k != n} e^{-i t a_{jk}} w^{l (j-k)}
//! a_{jk} = sin(pi (j+k)/n) sin(pi (j-k)/n)
//! ```
//!
//! `n(t)` has no constant term, so its integral grows at most like
//! `sum 1/|a_{jk}|`, and the product `n1(t) n2(t)` of two coprime cycles is
//! expected to behave the same way.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::trial_rng;
use crate::error::{invalid, Error, Result};
use crate::integrate::{
    averaging_factor, simpson_coefficient, simpson_intervals, sinc, CompensatedSum,
};
use crate::lattice::{gcd, CycleSpec};
use crate::spectral::{eigenphases, EigenClasses, TimeScale};

/// Largest step accepted by the running product integral.
pub const MAX_SWEEP_STEP: f64 = 0.02;
/// Default quadrature step for the product integral.
pub const DEFAULT_SWEEP_STEP: f64 = 0.02;
/// Largest `n1 n2` for which the 4-index closed form is evaluated.
pub const MAX_EXACT_PRODUCT: usize = 10_000;

const IMAG_TOL: f64 = 1e-9;
// phasors are recomputed from scratch this often
const RESTART_EVERY: usize = 1024;

/// One odd cycle, an offset `l = q - p` and a horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigSumParams {
    pub n: usize,
    pub offset: usize,
    pub horizon: f64,
}

impl TrigSumParams {
    pub fn new(n: usize, offset: usize, horizon: f64) -> Result<Self> {
        check_odd(n)?;
        if offset >= n {
            return Err(invalid(format!("offset {offset} outside Z_{n}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!(
                "horizon T must be finite and > 0, got {horizon}"
            )));
        }
        Ok(Self { n, offset, horizon })
    }
}

fn check_odd(n: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("cycle length must be >= 3, got {n}")));
    }
    if n.is_multiple_of(2) {
        return Err(Error::UnsupportedParity(format!(
            "cycle length {n} is even"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Analytic,
    Quadrature,
}

/// One instance of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub params: Vec<(String, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub method: BoundMethod,
    /// Relative change of `lhs` when the quadrature step is halved.
    pub refinement: Option<f64>,
}

impl BoundReport {
    pub fn new(
        label: impl Into<String>,
        params: Vec<(String, f64)>,
        lhs: f64,
        rhs: f64,
        method: BoundMethod,
    ) -> Self {
        Self {
            label: label.into(),
            params,
            lhs,
            rhs,
            satisfied: lhs <= rhs,
            method,
            refinement: None,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

fn frequency(n: usize, j: usize, k: usize) -> f64 {
    let nf = n as f64;
    (PI * (j + k) as f64 / nf).sin() * (PI * (j as f64 - k as f64) / nf).sin()
}

/// `n(t)` by the `O(n^2)` defining sum.
pub fn n_of_t_direct(params: &TrigSumParams, t: f64) -> Result<f64> {
    check_odd(params.n)?;
    let n = params.n;
    let table = eigenphases(&CycleSpec::new(n)?);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            if j == k || j + k == n {
                continue;
            }
            let phase = Complex64::from_polar(1.0, -t * frequency(n, j, k));
            acc += phase * table.root(params.offset as i64 * (j as i64 - k as i64));
        }
    }
    if acc.im.abs() > IMAG_TOL * (n * n) as f64 {
        return Err(invalid(format!("n(t) has imaginary part {:e}", acc.im)));
    }
    Ok(acc.re)
}

/// Class-grouped form of `n(t) = |sum_m e^{i t lambda_m / 2} b_m(l)|^2 - const`.
#[derive(Debug, Clone)]
struct CycleSum {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    constant: f64,
}

impl CycleSum {
    fn new(n: usize, offset: usize) -> Result<Self> {
        check_odd(n)?;
        let classes = EigenClasses::new(&CycleSpec::new(n)?);
        let nf = n as f64;
        let resonant = if offset.is_multiple_of(n) { nf } else { 0.0 };
        Ok(Self {
            lambdas: classes.lambdas().to_vec(),
            weights: classes.weights(offset).to_vec(),
            constant: nf + resonant - 1.0,
        })
    }

    fn phasors(&self, t: f64) -> Vec<Complex64> {
        let s = TimeScale::HALF.factor();
        self.lambdas
            .iter()
            .map(|&l| Complex64::from_polar(1.0, s * t * l))
            .collect()
    }

    fn value(&self, phasors: &[Complex64]) -> f64 {
        let amp: Complex64 = phasors.iter().zip(&self.weights).map(|(z, &b)| z * b).sum();
        amp.norm_sqr() - self.constant
    }
}

/// `n(t)` from the cycle amplitude, `O(n)`.
pub fn n_of_t_fast(params: &TrigSumParams, t: f64) -> Result<f64> {
    let sum = CycleSum::new(params.n, params.offset)?;
    Ok(sum.value(&sum.phasors(t)))
}

/// `int_0^T n(t) dt` in closed form.
///
/// The conjugate terms `(j,k)` and `(k,j)` combine to
/// `2 T cos(theta - a T/2) sinc(a T/2)` with `theta = 2 pi l (j-k)/n`.
pub fn n_integral(params: &TrigSumParams) -> Result<f64> {
    check_odd(params.n)?;
    let n = params.n;
    let horizon = params.horizon;
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        for k in (j + 1)..n {
            if j + k == n {
                continue;
            }
            let a = frequency(n, j, k);
            let diff = ((params.offset * (n - (k - j))) % n) as f64;
            let theta = 2.0 * PI * diff / n as f64;
            let half = 0.5 * a * horizon;
            acc.add(2.0 * horizon * (theta - half).cos() * sinc(half));
        }
    }
    Ok(acc.value())
}

/// `|int_0^T n(t) dt|`.
pub fn lemma2_integral(params: &TrigSumParams) -> Result<f64> {
    n_integral(params).map(f64::abs)
}

/// `32 (n ln n)^2`.
pub fn lemma2_bound(n: usize) -> Result<f64> {
    check_odd(n)?;
    let x = n as f64 * (n as f64).ln();
    Ok(32.0 * x * x)
}

pub fn lemma2_report(params: &TrigSumParams) -> Result<BoundReport> {
    let lhs = lemma2_integral(params)?;
    let rhs = lemma2_bound(params.n)?;
    Ok(BoundReport::new(
        "lemma2",
        vec![
            ("n".into(), params.n as f64),
            ("offset".into(), params.offset as f64),
            ("T".into(), params.horizon),
        ],
        lhs,
        rhs,
        BoundMethod::Analytic,
    ))
}

/// Checks that `dims` are odd and pairwise coprime.
pub fn check_conjecture_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(invalid("need at least one cycle"));
    }
    for &n in dims {
        check_odd(n)?;
    }
    for (i, &a) in dims.iter().enumerate() {
        for &b in &dims[i + 1..] {
            if gcd(a, b) != 1 {
                return Err(Error::Hypothesis(format!("{a} and {b} are not coprime")));
            }
        }
    }
    Ok(())
}

/// `16 d sum_j (prod_{i != j} n_i) (n_j ln n_j)^2`.
///
/// Symmetric in the order of `dims`, so no ordering is required.
pub fn conjecture_rhs(dims: &[usize]) -> Result<f64> {
    check_conjecture_dims(dims)?;
    let d = dims.len() as f64;
    let total: f64 = dims
        .iter()
        .enumerate()
        .map(|(j, &nj)| {
            let others: f64 = dims
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &n)| n as f64)
                .product();
            let x = nj as f64 * (nj as f64).ln();
            others * x * x
        })
        .sum();
    Ok(16.0 * d * total)
}

/// Signed `int_0^T n1(t) n2(t) dt` from the 4-index closed form,
/// `T sum c1 c2 g(-(a1 + a2), T)`. Restricted to `n1 n2 <= 1e4`.
pub fn conjecture_integral_exact(
    p1: &TrigSumParams,
    p2: &TrigSumParams,
    horizon: f64,
) -> Result<f64> {
    check_conjecture_dims(&[p1.n, p2.n])?;
    if p1.n * p2.n > MAX_EXACT_PRODUCT {
        return Err(Error::Size(format!(
            "closed form limited to n1 n2 <= {MAX_EXACT_PRODUCT}, got {}",
            p1.n * p2.n
        )));
    }
    let terms = |p: &TrigSumParams| -> Result<Vec<(f64, Complex64)>> {
        let n = p.n;
        let table = eigenphases(&CycleSpec::new(n)?);
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                if j != k && j + k != n {
                    v.push((
                        frequency(n, j, k),
                        table.root(p.offset as i64 * (j as i64 - k as i64)),
                    ));
                }
            }
        }
        Ok(v)
    };
    let (t1, t2) = (terms(p1)?, terms(p2)?);
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    for &(a1, c1) in &t1 {
        let mut inner = Complex64::new(0.0, 0.0);
        for &(a2, c2) in &t2 {
            inner += c2 * averaging_factor(-(a1 + a2), horizon);
        }
        let z = c1 * inner;
        re.add(z.re);
        im.add(z.im);
    }
    let scale = (p1.n * p2.n) as f64;
    if im.value().abs() > IMAG_TOL * scale * scale {
        return Err(invalid(format!(
            "product integral has imaginary part {:e}",
            im.value()
        )));
    }
    Ok(horizon * re.value())
}

/// Running integral of `n1(t) n2(t)` sampled on a time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Signed integral with step at most `dt`.
    pub value: f64,
    /// Same integral with the step halved, when requested.
    pub refined: Option<f64>,
}

impl CurvePoint {
    /// `|value - refined| / max(|value|, |refined|, 1)`.
    pub fn relative_change(&self) -> Option<f64> {
        self.refined.map(|r| {
            let denom = self.value.abs().max(r.abs()).max(1.0);
            (self.value - r).abs() / denom
        })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(invalid(format!(
            "grid times must be finite and > 0, got {bad}"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("time grid must be non-decreasing"));
    }
    Ok(())
}

fn check_sweep_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= MAX_SWEEP_STEP) {
        return Err(Error::Resolution {
            dt,
            max: MAX_SWEEP_STEP,
        });
    }
    Ok(())
}

/// Composite Simpson of `n1(t) n2(t)` between consecutive grid points, summed
/// with compensation. Each segment is sampled at half the Simpson step, so the
/// step-halved estimate comes from the same samples.
pub fn conjecture_curve(
    p1: &TrigSumParams,
    p2: &TrigSumParams,
    grid: &[f64],
    dt: f64,
    refine: bool,
) -> Result<Vec<CurvePoint>> {
    check_conjecture_dims(&[p1.n, p2.n])?;
    check_sweep_step(dt)?;
    check_grid(grid)?;
    let s1 = CycleSum::new(p1.n, p1.offset)?;
    let s2 = CycleSum::new(p2.n, p2.offset)?;
    let f = |ph1: &[Complex64], ph2: &[Complex64]| s1.value(ph1) * s2.value(ph2);

    let mut coarse_total = CompensatedSum::new();
    let mut fine_total = CompensatedSum::new();
    let mut out = Vec::with_capacity(grid.len());
    let mut start = 0.0;
    for &end in grid {
        let span = end - start;
        if span > 0.0 {
            let m = simpson_intervals(span, dt);
            let fine_m = 2 * m;
            let hf = span / fine_m as f64;
            let rot1 = s1.phasors(hf);
            let rot2 = s2.phasors(hf);
            let mut ph1 = Vec::new();
            let mut ph2 = Vec::new();
            let mut coarse = CompensatedSum::new();
            let mut fine = CompensatedSum::new();
            for i in 0..=fine_m {
                if i % RESTART_EVERY == 0 {
                    let t = start + i as f64 * hf;
                    ph1 = s1.phasors(t);
                    ph2 = s2.phasors(t);
                }
                let v = f(&ph1, &ph2);
                if i % 2 == 0 {
                    coarse.add(simpson_coefficient(i / 2, m) * v);
                }
                if refine {
                    fine.add(simpson_coefficient(i, fine_m) * v);
                }
                for (z, r) in ph1.iter_mut().zip(&rot1) {
                    *z *= r;
                }
                for (z, r) in ph2.iter_mut().zip(&rot2) {
                    *z *= r;
                }
            }
            coarse_total.add(coarse.value() * 2.0 * hf / 3.0);
            fine_total.add(fine.value() * hf / 3.0);
        }
        out.push(CurvePoint {
            t: end,
            value: coarse_total.value(),
            refined: refine.then(|| fine_total.value()),
        });
        start = end;
    }
    Ok(out)
}

/// `|int_0^T n1(t) n2(t) dt|` by running Simpson quadrature.
pub fn conjecture_lhs(
    p1: &TrigSumParams,
    p2: &TrigSumParams,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    let curve = conjecture_curve(p1, p2, &[horizon], dt, false)?;
    Ok(curve[0].value.abs())
}

/// All `(n1, n2)` with `lo <= n2 < n1 <= hi`, both odd and coprime, in
/// lexicographic order.
pub fn odd_coprime_pairs(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let lo = lo.max(3);
    let mut out = Vec::new();
    for n1 in lo..=hi {
        if n1 % 2 == 0 {
            continue;
        }
        for n2 in lo..n1 {
            if n2 % 2 == 1 && gcd(n1, n2) == 1 {
                out.push((n1, n2));
            }
        }
    }
    out
}

/// `count` distinct pairs drawn uniformly from [`odd_coprime_pairs`], returned
/// in lexicographic order. Deterministic in `seed`.
pub fn sample_pairs(lo: usize, hi: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let all = odd_coprime_pairs(lo, hi);
    if count > all.len() {
        return Err(invalid(format!(
            "asked for {count} pairs but the range [{lo}, {hi}] has only {}",
            all.len()
        )));
    }
    let mut rng = trial_rng(seed, 0);
    let mut picked: Vec<usize> = sample(&mut rng, all.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| all[i]).collect())
}

/// Evenly spaced grid `T_max i / points`, `i = 1..=points`.
pub fn linear_grid(t_max: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| t_max * i as f64 / points as f64)
        .collect()
}

/// One report per `(pair, offset, T)`, ordered by pair, then offset, then `T`.
/// The same offset `l` is used on both factors (reduced modulo `n_i`).
pub fn conjecture_sweep(
    pairs: &[(usize, usize)],
    grid: &[f64],
    dt: f64,
    offsets: &[usize],
    refine: bool,
) -> Result<Vec<BoundReport>> {
    check_sweep_step(dt)?;
    check_grid(grid)?;
    for &(a, b) in pairs {
        check_conjecture_dims(&[a, b])?;
    }
    let jobs: Vec<((usize, usize), usize)> = pairs
        .iter()
        .flat_map(|&p| offsets.iter().map(move |&l| (p, l)))
        .collect();
    let results: Vec<Vec<BoundReport>> = jobs
        .par_iter()
        .map(|&((n1, n2), l)| -> Result<Vec<BoundReport>> {
            let horizon = grid.last().copied().unwrap_or(1.0);
            let p1 = TrigSumParams::new(n1, l % n1, horizon)?;
            let p2 = TrigSumParams::new(n2, l % n2, horizon)?;
            let rhs = conjecture_rhs(&[n1, n2])?;
            let curve = conjecture_curve(&p1, &p2, grid, dt, refine)?;
            Ok(curve
                .iter()
                .map(|pt| {
                    let mut r = BoundReport::new(
                        "conjecture",
                        vec![
                            ("n1".into(), n1 as f64),
                            ("n2".into(), n2 as f64),
                            ("T".into(), pt.t),
                            ("offset".into(), l as f64),
                        ],
                        pt.value.abs(),
                        rhs,
                        BoundMethod::Quadrature,
                    );
                    r.refinement = pt.relative_change();
                    r
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn p(n: usize, l: usize, t: f64) -> TrigSumParams {
        TrigSumParams::new(n, l, t).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            TrigSumParams::new(4, 0, 1.0),
            Err(Error::UnsupportedParity(_))
        ));
        assert!(TrigSumParams::new(1, 0, 1.0).is_err());
        assert!(TrigSumParams::new(5, 5, 1.0).is_err());
        assert!(TrigSumParams::new(5, 0, 0.0).is_err());
        assert!(TrigSumParams::new(5, 0, f64::NAN).is_err());
    }

    #[test]
    fn values_at_time_zero() {
        assert_abs_diff_eq!(
            n_of_t_direct(&p(5, 0, 1.0), 0.0).unwrap(),
            16.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            n_of_t_fast(&p(5, 0, 1.0), 0.0).unwrap(),
            16.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            n_of_t_direct(&p(7, 3, 1.0), 0.0).unwrap(),
            -6.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            n_of_t_fast(&p(7, 3, 1.0), 0.0).unwrap(),
            -6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fast_matches_direct() {
        let q = p(19, 2, 1.0);
        assert_abs_diff_eq!(
            n_of_t_fast(&q, 7.3).unwrap(),
            n_of_t_direct(&q, 7.3).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn integral_vanishes_for_tiny_horizon() {
        assert!(lemma2_integral(&p(5, 0, 1e-12)).unwrap() < 1e-9);
    }

    #[test]
    fn lemma2_bound_values() {
        assert_relative_eq!(lemma2_bound(5).unwrap(), 2072.3, max_relative = 1e-4);
        assert_relative_eq!(lemma2_bound(19).unwrap(), 100152.7, max_relative = 1e-6);
        assert_relative_eq!(lemma2_bound(101).unwrap(), 6.958e6, max_relative = 1e-3);
        assert!(lemma2_bound(6).is_err());
    }

    #[test]
    fn rhs_values() {
        assert_relative_eq!(
            conjecture_rhs(&[19, 5]).unwrap(),
            5.401e5,
            max_relative = 1e-3
        );
        assert_eq!(
            conjecture_rhs(&[19, 5]).unwrap(),
            conjecture_rhs(&[5, 19]).unwrap()
        );
        let x = |n: f64| (n * n.ln()).powi(2);
        let expect = 48.0 * (15.0 * x(7.0) + 21.0 * x(5.0) + 35.0 * x(3.0));
        assert_relative_eq!(
            conjecture_rhs(&[7, 5, 3]).unwrap(),
            expect,
            max_relative = 1e-12
        );
        assert!(matches!(conjecture_rhs(&[9, 3]), Err(Error::Hypothesis(_))));
        assert!(conjecture_rhs(&[8, 3]).is_err());
    }

    #[test]
    fn pair_enumeration() {
        let pairs = odd_coprime_pairs(3, 9);
        assert_eq!(pairs, vec![(5, 3), (7, 3), (7, 5), (9, 5), (9, 7)]);
        let s = sample_pairs(10, 100, 50, 3).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, sample_pairs(10, 100, 50, 3).unwrap());
        assert!(sample_pairs(3, 9, 6, 0).is_err());
    }

    #[test]
    fn empty_sweep() {
        assert!(conjecture_sweep(&[], &[10.0], 0.02, &[0], false)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn curve_rejects_bad_input() {
        let (a, b) = (p(19, 0, 1.0), p(5, 0, 1.0));
        assert!(matches!(
            conjecture_curve(&a, &b, &[1.0], 0.05, false),
            Err(Error::Resolution { .. })
        ));
        assert!(conjecture_curve(&a, &b, &[2.0, 1.0], 0.02, false).is_err());
        assert!(conjecture_curve(&a, &p(57, 0, 1.0), &[1.0], 0.02, false).is_err());
    }

    #[test]
    fn short_curve_matches_closed_form() {
        let (a, b) = (p(7, 1, 5.0), p(5, 0, 5.0));
        let curve = conjecture_curve(&a, &b, &[1.0, 2.5, 5.0], 0.01, true).unwrap();
        let exact = conjecture_integral_exact(&a, &b, 5.0).unwrap();
        assert_relative_eq!(curve[2].value, exact, max_relative = 1e-8);
        assert!(curve[2].relative_change().unwrap() < 1e-8);
    }
}
