use lportho_core::bench::{run_bench, BenchConfig};
use lportho_core::toeplitz::{
    build_toeplitz, lp_circulant_minimizer, pcg_solve, strang_type_correction, ModelSymbol, PcgOptions,
    ToeplitzOperator,
};
use lportho_core::SolveStatus;
use nalgebra::DVector;
use proptest::prelude::*;

fn symmetric_toeplitz(max_n: usize) -> impl Strategy<Value = ToeplitzOperator> {
    (2..=max_n)
        .prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, n))
        .prop_map(|half| {
            // diagonally dominant, hence SPD
            let n = half.len();
            let mut col = half;
            col[0] = 2.0 * n as f64;
            let diags: Vec<f64> = (0..2 * n - 1)
                .map(|i| col[(i as i64 - (n as i64 - 1)).unsigned_abs() as usize])
                .collect();
            ToeplitzOperator::from_diagonals(diags).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pcg_agrees_with_dense_solve(t in symmetric_toeplitz(64), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let n = t.n();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let dense = t.to_dense().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let c = lp_circulant_minimizer(&t, p).unwrap();
        let m = if c.is_positive_definite() { Some(c) } else { None };
        let r = pcg_solve(&t, &b, m.as_ref(), &PcgOptions { tol: 1e-12, maxit: None }).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Converged);
        let err = (DVector::from_column_slice(&r.solution) - &dense).norm() / dense.norm();
        prop_assert!(err <= 1e-9, "err {}", err);
    }
}

#[test]
fn fast_product_matches_dense_at_odd_size() {
    let n = 33;
    let diags: Vec<f64> = (0..2 * n - 1)
        .map(|i| ((i * 7) % 11) as f64 - 5.0 + 0.25 * i as f64)
        .collect();
    let t = ToeplitzOperator::from_diagonals(diags).unwrap();
    let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
    let fast = t.matvec(&x).unwrap();
    let dense = t.to_dense() * DVector::from_column_slice(&x);
    for (a, b) in fast.iter().zip(dense.iter()) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn correction_turns_failures_into_counts() {
    let sym = ModelSymbol::new(0.0, 2.0, 8.0).unwrap();
    let mut cfg = BenchConfig::new(sym, vec![100, 400], vec![1.0, 1.4]);
    cfg.unpreconditioned = false;
    let plain = run_bench(&cfg, 2).unwrap();
    assert!(plain.cells.iter().all(|c| c.display() == "#"));
    cfg.correction = true;
    let fixed = run_bench(&cfg, 2).unwrap();
    for c in &fixed.cells {
        assert_eq!(c.status, SolveStatus::Converged, "{c:?}");
        assert!(c.corrected);
    }
}

#[test]
fn corrected_preconditioner_is_spd_and_solves() {
    let t = build_toeplitz(&ModelSymbol::new(0.0, 2.0, 8.0).unwrap().into(), 128).unwrap();
    let c = lp_circulant_minimizer(&t, 1.4).unwrap();
    assert!(!c.is_positive_definite());
    let fixed = strang_type_correction(&c, c.singularity_threshold()).unwrap();
    assert!(fixed.is_positive_definite());
    let r = pcg_solve(&t, &[1.0; 128], Some(&fixed), &PcgOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
}

#[test]
fn bench_is_deterministic_across_worker_counts() {
    let sym = ModelSymbol::new(1.0, 2.0, 3.0).unwrap();
    let mut cfg = BenchConfig::new(sym, vec![50, 80], vec![1.0, 2.0, 5.0]);
    cfg.rhs = "random(7)".parse().unwrap();
    let a = run_bench(&cfg, 1).unwrap();
    let b = run_bench(&cfg, 4).unwrap();
    assert_eq!(a.to_long_csv(), b.to_long_csv());
    assert_eq!(a.to_markdown(), b.to_markdown());
}
