mod support;

use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use qwalk_core::classical::{
    classical_mixing_curve, coupling_simulation, lazy_kernel, theorem1_bound,
};
use qwalk_core::LatticeSpec;

use support::{hitting_time, kernel_matrix, lazy_matrix, tv_uniform};

fn lat(d: &[usize]) -> LatticeSpec {
    LatticeSpec::new(d).unwrap()
}

#[test]
fn lazy_kernel_matches_dense_construction() {
    for dims in [vec![5usize], vec![4, 3], vec![9, 5], vec![3, 5, 7]] {
        let l = lat(&dims);
        let k = kernel_matrix(&lazy_kernel(&l).unwrap());
        assert!((k - lazy_matrix(&l)).amax() < 1e-15);
    }
}

#[test]
fn mixing_curve_matches_dense_powers() {
    let l = lat(&[7, 4]);
    let m = lazy_matrix(&l);
    let curve = classical_mixing_curve(&l, 60).unwrap();
    let mut v = DVector::<f64>::zeros(l.len());
    v[0] = 1.0;
    for (_, tv) in curve {
        assert_abs_diff_eq!(tv, tv_uniform(v.as_slice()), epsilon = 1e-12);
        v = &m * v;
    }
}

#[test]
fn lazy_walk_mixes_by_theorem1_time() {
    for dims in [[9usize, 5], [7, 7]] {
        let l = lat(&dims);
        for eps in [0.25, 0.1] {
            let t = theorem1_bound(&l, eps).unwrap();
            let tv = classical_mixing_curve(&l, t).unwrap().last().unwrap().1;
            assert!(tv <= eps, "{dims:?} eps {eps}: tv {tv} at t {t}");
        }
    }
}

#[test]
fn coupling_times_match_hitting_time_oracle() {
    for dims in [vec![9usize], vec![19, 5], vec![7, 7]] {
        let l = lat(&dims);
        let d = dims.len();
        let report = coupling_simulation(&l, 10_000, 5).unwrap();
        for (k, &n) in dims.iter().enumerate() {
            let expected = hitting_time(n, n / 2, 1.0 / d as f64);
            let closed = (d * (n / 2) * (n - n / 2)) as f64;
            assert_abs_diff_eq!(expected, closed, epsilon = 1e-8);
            let z = (report.mean_tau[k] - expected) / report.stderr_tau[k];
            assert!(z.abs() < 4.0, "{dims:?} coordinate {k}: z = {z}");
            assert!(report.mean_tau[k] <= report.bound[k] + 3.0 * report.stderr_tau[k]);
        }
    }
}
