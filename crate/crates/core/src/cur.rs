//! Fixed-index CUR maps.
//!
//! `cur(A) = AP · W(A)† · SᵀA` with `W(A) = SᵀAP`, and the rank-truncated
//! variant that replaces `W(A)` by its best rank-`r` approximation before
//! pseudo-inversion. The truncated map is smooth near admissible rank-`r`
//! matrices; the plain map is not once `W(A)` changes rank.

use crate::dense::{self, DenseMatrix};
use crate::error::{invalid, Result};
use crate::sampling::{self, SelectionPair};

fn assemble(a: &DenseMatrix, sel: &SelectionPair, middle: DenseMatrix) -> Result<DenseMatrix> {
    let c = sampling::select_cols(a, sel)?;
    let r = sampling::select_rows(a, sel)?;
    // AP · (W† · SᵀA): the intermediate stays c×n.
    Ok(c * (middle * r))
}

/// Ordinary CUR map `AP (SᵀAP)† SᵀA`.
pub fn cur(a: &DenseMatrix, sel: &SelectionPair, rel_tol: f64) -> Result<DenseMatrix> {
    let w = sampling::intersection(a, sel)?;
    let w_pinv = dense::pinv(&w, rel_tol)?;
    assemble(a, sel, w_pinv)
}

/// Rank-truncated CUR map `AP (SᵀAP)_r† SᵀA`.
pub fn cur_rank_truncated(a: &DenseMatrix, sel: &SelectionPair, r: usize) -> Result<DenseMatrix> {
    if r == 0 || r > sel.s().min(sel.c()) {
        return Err(invalid(format!(
            "rank {r} out of range 1..={} for a {}x{} intersection",
            sel.s().min(sel.c()),
            sel.s(),
            sel.c()
        )));
    }
    let w = sampling::intersection(a, sel)?;
    let w_pinv = dense::pinv_truncated(&w, r)?;
    assemble(a, sel, w_pinv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{fro_norm, gaussian_matrix, DEFAULT_REL_TOL};

    fn example_base() -> DenseMatrix {
        DenseMatrix::from_element(3, 3, 1.0 / 3.0)
    }

    fn first_cross() -> SelectionPair {
        SelectionPair::new(vec![0], vec![0], 3, 3).unwrap()
    }

    #[test]
    fn exact_on_example_base_point() {
        let m = example_base();
        let out = cur(&m, &first_cross(), DEFAULT_REL_TOL).unwrap();
        assert!(fro_norm(&(out - &m)) <= 1e-14);
        let out = cur_rank_truncated(&m, &first_cross(), 1).unwrap();
        assert!(fro_norm(&(out - &m)) <= 1e-14);
    }

    #[test]
    fn invisible_corner_is_removed_for_every_size() {
        let m = example_base();
        for eps in [1e-3, 2.0 / 3.0, 10.0] {
            let mut a = m.clone();
            a[(2, 2)] += eps;
            let out = cur_rank_truncated(&a, &first_cross(), 1).unwrap();
            assert!(fro_norm(&(out - &m)) <= 1e-14, "eps = {eps}");
        }
    }

    #[test]
    fn zero_intersection_gives_zero() {
        let mut a = gaussian_matrix(4, 4, 3);
        a.row_mut(1).fill(0.0);
        a.column_mut(2).fill(0.0);
        let sel = SelectionPair::new(vec![1], vec![2], 4, 4).unwrap();
        assert_eq!(cur(&a, &sel, DEFAULT_REL_TOL).unwrap(), DenseMatrix::zeros(4, 4));
    }

    #[test]
    fn full_selection_reproduces_full_rank_matrix() {
        let a = gaussian_matrix(6, 6, 12);
        let sel = SelectionPair::full(6, 6).unwrap();
        let out = cur(&a, &sel, DEFAULT_REL_TOL).unwrap();
        assert!(fro_norm(&(out - &a)) <= 1e-10 * fro_norm(&a));
    }

    #[test]
    fn truncated_map_differs_from_plain_map_off_the_manifold() {
        // Rank-1 base point plus a visible rank-raising perturbation: the plain
        // map inverts the tiny second singular value of W and reproduces A,
        // the truncated map stays close to the rank-1 base point.
        let u = gaussian_matrix(5, 1, 1);
        let v = gaussian_matrix(1, 5, 2);
        let m = &u * &v;
        let mut a = m.clone();
        a[(1, 1)] += 1e-6;
        let sel = SelectionPair::new(vec![0, 1], vec![0, 1], 5, 5).unwrap();
        let plain = cur(&a, &sel, DEFAULT_REL_TOL).unwrap();
        let trunc = cur_rank_truncated(&a, &sel, 1).unwrap();
        assert!(fro_norm(&(&trunc - &m)) < 1e-5);
        assert!(fro_norm(&(&plain - &trunc)) > 1e-8);
    }

    #[test]
    fn rank_argument_checked() {
        let a = gaussian_matrix(4, 4, 0);
        let sel = SelectionPair::new(vec![0, 1], vec![0, 1, 2], 4, 4).unwrap();
        assert!(cur_rank_truncated(&a, &sel, 3).is_err());
        assert!(cur_rank_truncated(&a, &sel, 0).is_err());
        assert!(cur_rank_truncated(&gaussian_matrix(3, 4, 0), &sel, 1).is_err());
    }
}
