//! Dense reference implementations used only as test oracles.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qwalk_core::{Complex64, LatticeSpec};

/// Normalized adjacency `(1/d) sum_k H_k` of the lattice, dense, with the
/// same row-major vertex order as the library.
pub fn lattice_adjacency(lattice: &LatticeSpec) -> DMatrix<f64> {
    let n = lattice.len();
    let d = lattice.dimension();
    let mut a = DMatrix::zeros(n, n);
    for v in 0..n {
        let c = lattice.coords(v);
        for k in 0..d {
            let nk = lattice.dims()[k];
            for step in [1, nk - 1] {
                let mut w = c.clone();
                w[k] = (w[k] + step) % nk;
                a[(lattice.index(&w), v)] += 0.5 / d as f64;
            }
        }
    }
    a
}

/// `e^{i t A}` by scaling and squaring with a truncated Taylor series.
pub fn expm_i(a: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = a.iter().map(|x| x.abs()).sum::<f64>().max(1e-300) * t.abs();
    let squarings = (norm.log2().ceil().max(0.0) as i32) + 2;
    let scale = t / 2f64.powi(squarings);
    let x: DMatrix<Complex64> = a.map(|v| Complex64::new(0.0, v * scale));
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..30 {
        term = &term * &x / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Measurement probabilities `|U(t)_{qp}|^2`.
pub fn probabilities(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    u.map(|z| z.norm_sqr())
}

/// Dense matrix whose column `p` is the kernel column for source `p`.
pub fn kernel_matrix(k: &qwalk_core::kernels::Kernel) -> DMatrix<f64> {
    let n = k.len();
    let cols = k.dense_columns();
    DMatrix::from_fn(n, n, |q, p| cols[p][q])
}

/// Lazy walk transition matrix, column-stochastic.
pub fn lazy_matrix(lattice: &LatticeSpec) -> DMatrix<f64> {
    let n = lattice.len();
    let a = lattice_adjacency(lattice);
    (DMatrix::identity(n, n) + a) * 0.5
}

/// Time-averaged probability matrix by Simpson quadrature over dense `e^{itA}`.
pub fn dense_averaged(lattice: &LatticeSpec, horizon: f64, steps: usize) -> DMatrix<f64> {
    assert!(steps.is_multiple_of(2));
    let a = lattice_adjacency(lattice);
    let n = lattice.len();
    let h = horizon / steps as f64;
    let step = expm_i(&a, h);
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for i in 0..=steps {
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += probabilities(&u) * w;
        u = &step * &u;
    }
    acc * (h / 3.0 / horizon)
}

/// Expected hitting time of 0 for the walk that, each step, with probability
/// `p_move` moves `+-1` uniformly on `Z_n` and otherwise stays; by linear solve.
pub fn hitting_time(n: usize, start: usize, p_move: f64) -> f64 {
    // unknowns h_1 .. h_{n-1}, h_0 = 0
    let m = n - 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let b = DVector::<f64>::from_element(m, 1.0);
    for x in 1..n {
        let i = x - 1;
        a[(i, i)] += p_move;
        for y in [(x + 1) % n, (x + n - 1) % n] {
            if y != 0 {
                a[(i, y - 1)] -= 0.5 * p_move;
            }
        }
    }
    let h = a.lu().solve(&b).expect("non-singular hitting system");
    h[start - 1]
}

/// `(1/2) sum |p - 1/N|`.
pub fn tv_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}
