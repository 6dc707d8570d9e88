//! Row/column selections, leverage-score ranking and admissibility.
//!
//! Selection matrices are never materialised: a [`SelectionPair`] stores the
//! chosen row and column indices, and extraction is exact indexing.

use std::collections::HashSet;

use crate::dense::{self, CompactSvd, DenseMatrix};
use crate::error::{invalid, Result};

/// Default absolute threshold on `σ_min(SᵀU)` and `σ_min(VᵀP)`.
pub const DEFAULT_ADMISSIBILITY_TOL: f64 = 1e-8;

/// Tolerance on `‖UᵀU − I‖₂` accepted by [`leverage_scores`].
const LEVERAGE_ORTHONORMAL_TOL: f64 = 1e-10;

/// Selected row indices (`S`) and column indices (`P`) of an `m×n` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionPair {
    rows: Vec<usize>,
    cols: Vec<usize>,
    m: usize,
    n: usize,
}

impl SelectionPair {
    /// Validates that both index lists are non-empty, distinct and in range.
    pub fn new(rows: Vec<usize>, cols: Vec<usize>, m: usize, n: usize) -> Result<Self> {
        check_indices(&rows, m, "row")?;
        check_indices(&cols, n, "column")?;
        Ok(Self { rows, cols, m, n })
    }

    /// Every row and every column, in order.
    pub fn full(m: usize, n: usize) -> Result<Self> {
        Self::new((0..m).collect(), (0..n).collect(), m, n)
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Ambient row count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Ambient column count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of selected rows.
    pub fn s(&self) -> usize {
        self.rows.len()
    }

    /// Number of selected columns.
    pub fn c(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn check_matrix(&self, a: &DenseMatrix) -> Result<()> {
        if a.nrows() != self.m || a.ncols() != self.n {
            return Err(invalid(format!(
                "matrix is {}x{} but the selection expects {}x{}",
                a.nrows(),
                a.ncols(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }
}

fn check_indices(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if idx.is_empty() {
        return Err(invalid(format!("at least one {what} must be selected")));
    }
    let mut seen = HashSet::with_capacity(idx.len());
    for &i in idx {
        if i >= bound {
            return Err(invalid(format!("{what} index {i} out of range 0..{bound}")));
        }
        if !seen.insert(i) {
            return Err(invalid(format!("duplicate {what} index {i}")));
        }
    }
    Ok(())
}

/// Squared row norms of a matrix with orthonormal columns. They sum to the
/// number of columns.
pub fn leverage_scores(u: &DenseMatrix) -> Result<Vec<f64>> {
    dense::ensure_finite(u, "basis")?;
    let gap = dense::orthonormality_gap(u);
    if gap > LEVERAGE_ORTHONORMAL_TOL {
        return Err(invalid(format!("basis columns are not orthonormal (gap {gap:e})")));
    }
    Ok(u.row_iter().map(|row| row.norm_squared()).collect())
}

/// Indices of the `k` largest scores in ascending index order. Equal scores
/// are broken in favour of the smaller index.
pub fn top_k_selection(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(invalid(format!("cannot select {k} of {} scores", scores.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// `σ_r` of `a`, or zero when `a` has fewer than `r` singular values.
pub(crate) fn sigma_at_rank(a: &DenseMatrix, r: usize) -> f64 {
    if r == 0 {
        return f64::INFINITY;
    }
    dense::singular_values(a).get(r - 1).copied().unwrap_or(0.0)
}

/// `(σ_r(SᵀU), σ_r(VᵀP))`, the margins that decide admissibility.
pub fn admissibility_margins(svd: &CompactSvd, sel: &SelectionPair) -> Result<(f64, f64)> {
    if svd.nrows() != sel.m() || svd.ncols() != sel.n() {
        return Err(invalid(format!(
            "decomposition is {}x{} but the selection expects {}x{}",
            svd.nrows(),
            svd.ncols(),
            sel.m(),
            sel.n()
        )));
    }
    let r = svd.rank();
    let su = svd.left().select_rows(sel.rows());
    let pv = svd.right().select_rows(sel.cols());
    Ok((sigma_at_rank(&su, r), sigma_at_rank(&pv, r)))
}

/// True iff `σ_min(SᵀU) ≥ tol` and `σ_min(VᵀP) ≥ tol`, i.e. the selection
/// captures both the column and the row space of `M = UΣVᵀ`.
pub fn is_admissible(svd: &CompactSvd, sel: &SelectionPair, tol: f64) -> Result<bool> {
    let (left, right) = admissibility_margins(svd, sel)?;
    Ok(left >= tol && right >= tol)
}

/// `SᵀA`.
pub fn select_rows(a: &DenseMatrix, sel: &SelectionPair) -> Result<DenseMatrix> {
    sel.check_matrix(a)?;
    Ok(a.select_rows(sel.rows()))
}

/// `AP`.
pub fn select_cols(a: &DenseMatrix, sel: &SelectionPair) -> Result<DenseMatrix> {
    sel.check_matrix(a)?;
    Ok(a.select_columns(sel.cols()))
}

/// `SᵀAP`.
pub fn intersection(a: &DenseMatrix, sel: &SelectionPair) -> Result<DenseMatrix> {
    sel.check_matrix(a)?;
    Ok(a.select_rows(sel.rows()).select_columns(sel.cols()))
}

/// `I − SSᵀ`: the identity with the selected diagonal entries zeroed.
pub fn complement_projector_left(sel: &SelectionPair) -> DenseMatrix {
    complement(sel.m(), sel.rows())
}

/// `I − PPᵀ`.
pub fn complement_projector_right(sel: &SelectionPair) -> DenseMatrix {
    complement(sel.n(), sel.cols())
}

fn complement(dim: usize, idx: &[usize]) -> DenseMatrix {
    let mut p = DenseMatrix::identity(dim, dim);
    for &i in idx {
        p[(i, i)] = 0.0;
    }
    p
}

/// Copy of `a` with the selected rows and columns set to zero, i.e.
/// `(I − SSᵀ) A (I − PPᵀ)` computed by assignment.
pub(crate) fn zero_cross(a: &DenseMatrix, sel: &SelectionPair) -> DenseMatrix {
    let mut out = a.clone();
    for &i in sel.rows() {
        out.row_mut(i).fill(0.0);
    }
    for &j in sel.cols() {
        out.column_mut(j).fill(0.0);
    }
    out
}
