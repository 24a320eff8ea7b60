mod support;

use approx::assert_abs_diff_eq;
use nalgebra::SymmetricEigen;
use qwalk_core::spectral::{
    cycle_amplitude, eigenphases, product_amplitude, spectral_gap, TimeScale,
};
use qwalk_core::{CycleSpec, LatticeSpec};

use support::{expm_i, lattice_adjacency};

#[test]
fn cycle_amplitudes_match_dense_exponential() {
    for n in [3usize, 4, 5, 8, 19, 45] {
        let lattice = LatticeSpec::new(&[n]).unwrap();
        let a = lattice_adjacency(&lattice);
        for &t in &[0.0, 1.0, n as f64 / 3.0, 17.3] {
            let u = expm_i(&a, t);
            for p in [0, n / 2] {
                let amp =
                    cycle_amplitude(&CycleSpec::new(n).unwrap(), p, t, TimeScale::FULL).unwrap();
                for q in 0..n {
                    let z = amp.entries[q];
                    assert_abs_diff_eq!(z.re, u[(q, p)].re, epsilon = 1e-9);
                    assert_abs_diff_eq!(z.im, u[(q, p)].im, epsilon = 1e-9);
                }
            }
        }
    }
}

#[test]
fn product_amplitudes_match_dense_exponential() {
    for dims in [vec![5usize, 3], vec![9, 5], vec![4, 3], vec![3, 3, 5]] {
        let lattice = LatticeSpec::new(&dims).unwrap();
        let a = lattice_adjacency(&lattice);
        for &t in &[0.7, 6.0, 17.3] {
            let u = expm_i(&a, t);
            let source = vec![1; dims.len()];
            let p = lattice.index(&source);
            let amp = product_amplitude(&lattice, &source, t).unwrap();
            for q in 0..lattice.len() {
                assert_abs_diff_eq!(amp[q].re, u[(q, p)].re, epsilon = 1e-9);
                assert_abs_diff_eq!(amp[q].im, u[(q, p)].im, epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn eigenvalues_match_dense_diagonalization() {
    for n in [3usize, 6, 19] {
        let a = lattice_adjacency(&LatticeSpec::new(&[n]).unwrap());
        let mut dense: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        let mut ours = eigenphases(&CycleSpec::new(n).unwrap()).lambdas().to_vec();
        dense.sort_by(f64::total_cmp);
        ours.sort_by(f64::total_cmp);
        for (x, y) in dense.iter().zip(&ours) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }
}

#[test]
fn spectral_gap_matches_dense_diagonalization() {
    for dims in [vec![5usize], vec![7, 5], vec![4, 6], vec![3, 5, 7]] {
        let lattice = LatticeSpec::new(&dims).unwrap();
        let a = lattice_adjacency(&lattice);
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        assert_abs_diff_eq!(spectral_gap(&lattice), 1.0 - ev[1], epsilon = 1e-10);
    }
}

#[test]
fn amplitudes_are_unit_norm() {
    for n in [3usize, 5, 19, 101] {
        let spec = CycleSpec::new(n).unwrap();
        for &t in &[0.0, 1.0, n as f64 / 3.0, 17.3] {
            for scale in [TimeScale::FULL, TimeScale::HALF] {
                let amp = cycle_amplitude(&spec, 0, t, scale).unwrap();
                assert_abs_diff_eq!(amp.norm_sqr(), 1.0, epsilon = 1e-10);
            }
        }
    }
}
