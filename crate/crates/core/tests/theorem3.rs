use approx::assert_abs_diff_eq;
use qwalk_core::experiments::theorem3_case_check;
use qwalk_core::kernels::averaged_entries_quadrature;
use qwalk_core::LatticeSpec;

#[test]
fn strict_pair_satisfies_every_case_bound() {
    let out = theorem3_case_check(95, 93, true).unwrap();
    assert!(out.asserted);
    for r in &out.reports {
        assert!(r.satisfied, "{}: {} > {}", r.label, r.lhs, r.rhs);
    }
    let agg = out.report("aggregate_l1").unwrap();
    assert!(agg.lhs < 1.0 / (2.0 * std::f64::consts::E));
}

/// Independent quadrature of a few entries at the full horizon. Takes minutes
/// on one core, so it only runs on request.
#[test]
#[ignore]
fn strict_pair_entries_match_quadrature() {
    let out = theorem3_case_check(95, 93, true).unwrap();
    let kernel = out.kernel.as_ref().unwrap();
    let lattice = LatticeSpec::new(&[95, 93]).unwrap();
    let entries: Vec<usize> = [[0, 0], [0, 1], [1, 0], [1, 1], [47, 46]]
        .iter()
        .map(|c| lattice.index(c))
        .collect();
    let quad = averaged_entries_quadrature(&lattice, out.horizon, 0.05, &entries).unwrap();
    let mut partial_analytic = 0.0;
    let mut partial_quad = 0.0;
    let u = 1.0 / lattice.len() as f64;
    for (&e, q) in entries.iter().zip(quad) {
        assert_abs_diff_eq!(kernel.first_column()[e], q, epsilon = 1e-7);
        partial_analytic += (kernel.first_column()[e] - u).abs();
        partial_quad += (q - u).abs();
    }
    assert_abs_diff_eq!(partial_analytic, partial_quad, epsilon = 1e-5);
}
