mod support;

use approx::assert_abs_diff_eq;
use qwalk_core::kernels::{
    averaged_entries_quadrature, averaged_kernel_analytic, averaged_kernel_quadrature,
    instantaneous_kernel, kernel_power, Kernel,
};
use qwalk_core::trig_sums::{conjecture_integral_exact, n_integral, TrigSumParams};
use qwalk_core::LatticeSpec;

use support::{dense_averaged, expm_i, kernel_matrix, lattice_adjacency, probabilities};

fn lat(d: &[usize]) -> LatticeSpec {
    LatticeSpec::new(d).unwrap()
}

fn assert_columns_close(a: &Kernel, b: &Kernel, tol: f64) {
    for (x, y) in a.first_column().iter().zip(b.first_column()) {
        assert_abs_diff_eq!(x, y, epsilon = tol);
    }
}

#[test]
fn instantaneous_kernel_matches_dense() {
    let l = lat(&[9, 5]);
    let u = expm_i(&lattice_adjacency(&l), 7.5);
    let p = probabilities(&u);
    let k = kernel_matrix(&instantaneous_kernel(&l, 7.5).unwrap());
    assert!((p - k).amax() < 1e-9);
}

#[test]
fn analytic_matches_dense_time_average() {
    for (dims, horizon) in [
        (vec![5usize], 3.0),
        (vec![7], 11.0),
        (vec![5, 3], 4.0),
        (vec![7, 5], 9.5),
    ] {
        let l = lat(&dims);
        let dense = dense_averaged(&l, horizon, 2000);
        let k = kernel_matrix(&averaged_kernel_analytic(&l, horizon).unwrap());
        assert!((dense - k).amax() < 1e-9, "dims {dims:?}");
    }
}

#[test]
fn analytic_matches_quadrature_on_19_by_5() {
    let l = lat(&[19, 5]);
    for horizon in [1.0, 24.0, 100.0] {
        let a = averaged_kernel_analytic(&l, horizon).unwrap();
        let q = averaged_kernel_quadrature(&l, horizon, 0.02).unwrap();
        assert_columns_close(&a, &q, 1e-6);
    }
}

#[test]
fn quadrature_step_halving() {
    let l = lat(&[5]);
    let a = averaged_kernel_quadrature(&l, 1.0, 0.01).unwrap();
    let b = averaged_kernel_quadrature(&l, 1.0, 0.005).unwrap();
    assert_columns_close(&a, &b, 1e-8);
    let c = averaged_kernel_quadrature(&lat(&[3]), 10.0, 0.01).unwrap();
    assert!(c.first_column().iter().all(|&p| (0.0..=1.0).contains(&p)));
}

#[test]
fn even_cycles_are_averaged_by_quadrature_only() {
    let l = lat(&[4, 3]);
    assert!(averaged_kernel_analytic(&l, 2.0).is_err());
    let q = averaged_kernel_quadrature(&l, 2.0, 0.01).unwrap();
    let dense = dense_averaged(&l, 2.0, 400);
    assert!((dense - kernel_matrix(&q)).amax() < 1e-9);
}

#[test]
fn sampled_entries_match_full_kernel() {
    let l = lat(&[19, 5]);
    let full = averaged_kernel_analytic(&l, 60.0).unwrap();
    let entries = [0, 1, 5, 47, 94];
    let got = averaged_entries_quadrature(&l, 60.0, 0.02, &entries).unwrap();
    for (&e, g) in entries.iter().zip(got) {
        assert_abs_diff_eq!(full.first_column()[e], g, epsilon = 1e-9);
    }
}

#[test]
fn analytic_kernel_is_symmetric_and_doubly_stochastic() {
    let l = lat(&[19, 5]);
    let k = averaged_kernel_analytic(&l, 24.0).unwrap();
    let m = kernel_matrix(&k);
    assert!((&m - m.transpose()).amax() < 1e-12);
    for i in 0..l.len() {
        assert_abs_diff_eq!(m.row(i).sum(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.column(i).sum(), 1.0, epsilon = 1e-9);
    }
}

#[test]
fn power_matches_dense_cube() {
    let l = lat(&[7]);
    let k = averaged_kernel_analytic(&l, 3.0).unwrap();
    let m = kernel_matrix(&k);
    let cube = kernel_matrix(&kernel_power(&k, 3).unwrap());
    assert!((&m * &m * &m - cube).amax() < 1e-9);
    assert_eq!(
        kernel_power(&k, 1).unwrap().first_column(),
        k.first_column()
    );
    let id = Kernel::identity(&l);
    assert_eq!(
        kernel_power(&id, 5).unwrap().first_column(),
        id.first_column()
    );
    assert!(kernel_power(&k, -1).is_err());
}

/// `(n1 n2)^2 P_T(0,l)` expands into the constant parts `C_i = n_i + n_i I{l_i=0} - 1`
/// and the oscillating sums `n_i(t)`.
#[test]
fn averaged_entry_expands_into_trig_sums() {
    let (n1, n2) = (19usize, 5usize);
    let horizon = 37.0;
    let l = lat(&[n1, n2]);
    let k = averaged_kernel_analytic(&l, horizon).unwrap();
    for (l1, l2) in [(0, 0), (0, 2), (3, 0), (7, 4), (18, 1)] {
        let p1 = TrigSumParams::new(n1, l1, horizon).unwrap();
        let p2 = TrigSumParams::new(n2, l2, horizon).unwrap();
        let c = |n: usize, l: usize| n as f64 + if l == 0 { n as f64 } else { 0.0 } - 1.0;
        let (c1, c2) = (c(n1, l1), c(n2, l2));
        let expansion = c1 * c2
            + c1 * n_integral(&p2).unwrap() / horizon
            + c2 * n_integral(&p1).unwrap() / horizon
            + conjecture_integral_exact(&p1, &p2, horizon).unwrap() / horizon;
        let scaled = ((n1 * n2) as f64).powi(2) * k.first_column()[l.index(&[l1, l2])];
        assert_abs_diff_eq!(scaled, expansion, epsilon = 1e-6);
    }
}
