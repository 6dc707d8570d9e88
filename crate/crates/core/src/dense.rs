//! Dense matrix primitives: compact SVD, best rank-`r` truncation,
//! Moore–Penrose pseudoinverses, norms and seeded Gaussian sampling.
//!
//! The SVD itself is delegated to `nalgebra`; everything here only sorts,
//! sign-normalises and truncates its output. Singular vectors are
//! sign-normalised so that the largest-magnitude entry of every left singular
//! vector is non-negative, which makes results reproducible across backends.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Real dense matrix; the universal carrier of this crate.
pub type DenseMatrix = DMatrix<f64>;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const ORTHONORMAL_TOL: f64 = 1e-12;

/// Compact singular value decomposition `A = U diag(σ) Vᵀ`.
///
/// `left` is `m×k`, `right` is `n×k`, both with orthonormal columns, and the
/// `k` singular values are strictly positive and non-increasing. `k` may be
/// zero (the decomposition of a zero matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSvd {
    left: DenseMatrix,
    sigmas: Vec<f64>,
    right: DenseMatrix,
}

impl CompactSvd {
    /// Builds a decomposition from explicit factors, validating every invariant.
    pub fn new(left: DenseMatrix, sigmas: Vec<f64>, right: DenseMatrix) -> Result<Self> {
        let k = sigmas.len();
        if left.ncols() != k || right.ncols() != k {
            return Err(invalid(format!(
                "factor shapes {}x{} / {}x{} do not match {} singular values",
                left.nrows(),
                left.ncols(),
                right.nrows(),
                right.ncols(),
                k
            )));
        }
        if left.nrows() == 0 || right.nrows() == 0 {
            return Err(invalid("ambient dimensions must be positive"));
        }
        ensure_finite(&left, "left factor")?;
        ensure_finite(&right, "right factor")?;
        if sigmas.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(invalid("singular values must be finite and strictly positive"));
        }
        if sigmas.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("singular values must be non-increasing"));
        }
        if k > left.nrows() || k > right.nrows() {
            return Err(invalid("rank exceeds an ambient dimension"));
        }
        for (name, f) in [("left", &left), ("right", &right)] {
            let gap = orthonormality_gap(f);
            if gap > ORTHONORMAL_TOL {
                return Err(invalid(format!(
                    "{name} factor is not orthonormal (‖FᵀF − I‖₂ = {gap:e})"
                )));
            }
        }
        Ok(Self { left, sigmas, right })
    }

    /// `m×k` matrix of left singular vectors.
    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    /// `n×k` matrix of right singular vectors.
    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn rank(&self) -> usize {
        self.sigmas.len()
    }

    /// Number of rows of the decomposed matrix.
    pub fn nrows(&self) -> usize {
        self.left.nrows()
    }

    /// Number of columns of the decomposed matrix.
    pub fn ncols(&self) -> usize {
        self.right.nrows()
    }

    /// Smallest retained singular value, `None` for the zero matrix.
    pub fn smallest_sigma(&self) -> Option<f64> {
        self.sigmas.last().copied()
    }

    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled = self.left.clone();
        for (j, s) in self.sigmas.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.right.transpose()
    }

    /// The leading `r` triplets.
    pub fn truncated(&self, r: usize) -> Result<Self> {
        if r > self.rank() {
            return Err(invalid(format!("cannot keep {r} of {} triplets", self.rank())));
        }
        Ok(Self {
            left: self.left.columns(0, r).into_owned(),
            sigmas: self.sigmas[..r].to_vec(),
            right: self.right.columns(0, r).into_owned(),
        })
    }

    /// `V diag(1/σ) Uᵀ`.
    pub fn pinv(&self) -> DenseMatrix {
        let mut scaled = self.right.clone();
        for (j, s) in self.sigmas.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / s);
        }
        scaled * self.left.transpose()
    }
}

/// Full thin SVD, sorted non-increasing and sign-normalised. Keeps zero
/// singular values.
struct SortedSvd {
    u: DenseMatrix,
    s: Vec<f64>,
    v: DenseMatrix,
}

fn sorted_svd(a: &DenseMatrix) -> SortedSvd {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors were requested");
    let v = svd.v_t.expect("right singular vectors were requested").transpose();
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();

    // Stable sort: ties keep the order produced by the SVD routine.
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));

    let mut su = u.select_columns(&order);
    let mut sv = v.select_columns(&order);
    let s: Vec<f64> = order.iter().map(|&i| raw[i].max(0.0)).collect();

    for j in 0..s.len() {
        let col = su.column(j);
        let pivot = col.iter().copied().fold(0.0_f64, |best, x| {
            if x.abs() > best.abs() {
                x
            } else {
                best
            }
        });
        if pivot < 0.0 {
            su.column_mut(j).neg_mut();
            sv.column_mut(j).neg_mut();
        }
    }
    SortedSvd { u: su, s, v: sv }
}

pub(crate) fn ensure_finite(a: &DenseMatrix, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} has non-finite entries")))
    }
}

fn ensure_nonempty(a: &DenseMatrix) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        Err(invalid(format!("matrix must be non-empty, got {}x{}", a.nrows(), a.ncols())))
    } else {
        Ok(())
    }
}

/// Spectral norm of `FᵀF − I`.
pub(crate) fn orthonormality_gap(f: &DenseMatrix) -> f64 {
    let gram = f.transpose() * f;
    let k = gram.nrows();
    if k == 0 {
        return 0.0;
    }
    spectral_norm(&(gram - DenseMatrix::identity(k, k)))
}

/// Compact SVD retaining every singular value above `rel_tol · σ_max(A)`.
pub fn compact_svd(a: &DenseMatrix, rel_tol: f64) -> Result<CompactSvd> {
    ensure_nonempty(a)?;
    ensure_finite(a, "input")?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let full = sorted_svd(a);
    let smax = full.s.first().copied().unwrap_or(0.0);
    let k = full.s.iter().take_while(|&&s| s > rel_tol * smax).count();
    Ok(CompactSvd {
        left: full.u.columns(0, k).into_owned(),
        sigmas: full.s[..k].to_vec(),
        right: full.v.columns(0, k).into_owned(),
    })
}

fn check_rank_arg(a: &DenseMatrix, r: usize) -> Result<()> {
    let p = a.nrows().min(a.ncols());
    if r == 0 || r > p {
        return Err(invalid(format!(
            "rank {r} out of range 1..={p} for a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Best rank-`r` approximation (Frobenius and spectral), built from the `r`
/// largest singular triplets.
pub fn truncate_rank(a: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    ensure_nonempty(a)?;
    ensure_finite(a, "input")?;
    check_rank_arg(a, r)?;
    let full = sorted_svd(a);
    let mut scaled = full.u.columns(0, r).into_owned();
    for j in 0..r {
        scaled.column_mut(j).scale_mut(full.s[j]);
    }
    Ok(scaled * full.v.columns(0, r).transpose())
}

/// Moore–Penrose pseudoinverse, treating singular values at or below
/// `rel_tol · σ_max` as zero.
pub fn pinv(a: &DenseMatrix, rel_tol: f64) -> Result<DenseMatrix> {
    Ok(compact_svd(a, rel_tol)?.pinv())
}

/// Pseudoinverse of the best rank-`r` approximation: only the `r` largest
/// singular values are inverted. Retained values at or below
/// [`DEFAULT_REL_TOL`]` · σ_max` are dropped, so the result agrees with
/// `pinv(truncate_rank(a, r), DEFAULT_REL_TOL)`.
pub fn pinv_truncated(a: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    ensure_nonempty(a)?;
    ensure_finite(a, "input")?;
    check_rank_arg(a, r)?;
    let full = sorted_svd(a);
    let smax = full.s[0];
    let k = full.s[..r].iter().take_while(|&&s| s > DEFAULT_REL_TOL * smax).count();
    let mut scaled = full.v.columns(0, k).into_owned();
    for j in 0..k {
        scaled.column_mut(j).scale_mut(1.0 / full.s[j]);
    }
    Ok(scaled * full.u.columns(0, k).transpose())
}

/// Singular values of `a` in non-increasing order (all `min(m, n)` of them).
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    if a.iter().any(|x| !x.is_finite()) {
        return vec![f64::NAN; a.nrows().min(a.ncols())];
    }
    let mut s: Vec<f64> = a.singular_values().iter().map(|x| x.max(0.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `σ_max(A)`. Non-finite input yields NaN.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// `sqrt(Σ a_ij²)`.
pub fn fro_norm(a: &DenseMatrix) -> f64 {
    a.norm()
}

/// `m×n` matrix of i.i.d. standard normal entries, filled in row-major order
/// from a ChaCha8 stream seeded with `seed`.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_row_iterator(
        m,
        n,
        (0..m * n).map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x
        }),
    )
}

/// `m×r` matrix with orthonormal columns spanning the columns of
/// `gaussian_matrix(m, r, seed)` (Householder QR, `diag(R) ≥ 0`).
pub fn orthonormalize_gaussian(m: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    if r == 0 || r > m {
        return Err(invalid(format!("cannot orthonormalize {r} columns in dimension {m}")));
    }
    let qr = gaussian_matrix(m, r, seed).qr();
    let mut q = qr.q();
    let rfac = qr.r();
    for j in 0..r {
        if rfac[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}
