use curtangent_core::cur;
use curtangent_core::dense::{self, DenseMatrix};
use curtangent_core::experiment::{build_test_problem, ExperimentConfig};
use curtangent_core::perturb;
use curtangent_core::sampling;
use proptest::prelude::*;

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig { m: 30, n: 25, rank: 3, rows: 6, cols: 6, seed, ..ExperimentConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn admissible_cur_is_exact(seed in 0u64..10_000) {
        let p = build_test_problem(&small_config(seed)).unwrap();
        let m = p.base();
        let out = cur::cur_rank_truncated(m, &p.sel, 3).unwrap();
        prop_assert!(dense::fro_norm(&(out - m)) <= 1e-11 * dense::fro_norm(m));
    }

    #[test]
    fn cur_interpolates_selected_rows_and_columns(seed in 0u64..10_000, eps in 1e-6f64..1e-2) {
        // Full-rank intersection: rank equals the budget, so Φ reproduces C and R.
        let cfg = ExperimentConfig { rank: 6, ..small_config(seed) };
        let p = build_test_problem(&cfg).unwrap();
        let a = p.base() + perturb::generic_perturbation(30, 25, seed + 1) * eps;
        let out = cur::cur_rank_truncated(&a, &p.sel, 6).unwrap();
        let scale = dense::fro_norm(&a);
        let dr = sampling::select_rows(&out, &p.sel).unwrap() - sampling::select_rows(&a, &p.sel).unwrap();
        let dc = sampling::select_cols(&out, &p.sel).unwrap() - sampling::select_cols(&a, &p.sel).unwrap();
        prop_assert!(dense::fro_norm(&dr) <= 1e-9 * scale);
        prop_assert!(dense::fro_norm(&dc) <= 1e-9 * scale);
    }

    #[test]
    fn invisible_perturbations_leave_cur_unchanged(seed in 0u64..10_000, eps in 1e-8f64..10.0) {
        let p = build_test_problem(&small_config(seed)).unwrap();
        let m = p.base();
        let e = perturb::invisible_perturbation(&p.sel, seed + 5).unwrap();
        let out = cur::cur_rank_truncated(&(m + e * eps), &p.sel, 3).unwrap();
        prop_assert!(dense::fro_norm(&(out - m)) <= 1e-12 * dense::fro_norm(m).max(1.0));
    }
}

#[test]
fn plain_cur_of_exact_low_rank_matches_truncated() {
    let p = build_test_problem(&small_config(3)).unwrap();
    let m = p.base();
    let plain = cur::cur(m, &p.sel, dense::DEFAULT_REL_TOL).unwrap();
    let trunc = cur::cur_rank_truncated(m, &p.sel, 3).unwrap();
    assert!(dense::fro_norm(&(plain - trunc)) <= 1e-11 * dense::fro_norm(m));
}

#[test]
fn rank_out_of_range_is_rejected() {
    let p = build_test_problem(&small_config(3)).unwrap();
    assert!(cur::cur_rank_truncated(p.base(), &p.sel, 0).is_err());
    assert!(cur::cur_rank_truncated(p.base(), &p.sel, 7).is_err());
    assert!(cur::cur_rank_truncated(&DenseMatrix::zeros(3, 3), &p.sel, 3).is_err());
}
