//! Fixed-rank matrix calculus around the rank-truncated CUR map.
//!
//! This module holds the pieces needed to check the local expansion
//! `Φ_r(M + E) = M + I(E) + O(‖E‖²)` from several independent directions:
//! the derivative of the pseudoinverse along fixed-rank curves, the
//! quantitative rank-truncation remainder bound, central finite differences,
//! and first-order residuals for both CUR and SVD truncation.

use log::warn;

use crate::cur;
use crate::dense::{self, CompactSvd, DenseMatrix, DEFAULT_REL_TOL};
use crate::error::{invalid, Error, Result};
use crate::sampling::{self, SelectionPair, DEFAULT_ADMISSIBILITY_TOL};
use crate::tangent::{self, TangentPoint};

/// Default `c` in the hypothesis `‖E‖₂ ≤ c·γ`.
pub const DEFAULT_C: f64 = 0.2;

/// Default relative step for central differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Outcome of [`truncation_expansion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    /// `‖(W + E)_r − W − P_T(E)‖₂`
    pub remainder_norm: f64,
    /// `((12 − 16c) / (1 − 2c)) · ‖E‖₂² / γ`
    pub bound: f64,
    /// `σ_r(W)`
    pub gamma: f64,
    pub c_used: f64,
    /// `remainder_norm ≤ bound + 1e-12`
    pub satisfied: bool,
}

/// Observed and predicted sizes of a first-order expansion, all Frobenius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderReport {
    /// `‖F(M + E) − M − L(E)‖_F` where `L` is the claimed derivative.
    pub residual: f64,
    /// `‖L(E)‖_F`
    pub first_order: f64,
    /// `‖F(M + E) − M‖_F`
    pub observed: f64,
}

/// Constant of the rank-truncation remainder bound, `(12 − 16c) / (1 − 2c)`.
pub fn remainder_constant(c: f64) -> f64 {
    (12.0 - 16.0 * c) / (1.0 - 2.0 * c)
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("c must lie in (0, 1/2), got {c}")))
    }
}

fn same_shape(a: &DenseMatrix, b: &DenseMatrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(invalid(format!("{what}: shapes {:?} and {:?} differ", a.shape(), b.shape())));
    }
    Ok(())
}

/// Checks that `w` has numerical rank exactly `r` and returns its singular values.
fn exact_rank_spectrum(w: &DenseMatrix, r: usize) -> Result<Vec<f64>> {
    dense::ensure_finite(w, "W")?;
    let s = dense::singular_values(w);
    if r == 0 || r > s.len() {
        return Err(invalid(format!("rank {r} out of range for a {}x{} matrix", w.nrows(), w.ncols())));
    }
    if s[r - 1] <= DEFAULT_REL_TOL * s[0] {
        return Err(invalid(format!("W is rank deficient: σ_{r}/σ_1 = {:e}", s[r - 1] / s[0])));
    }
    if let Some(&next) = s.get(r) {
        if next > DEFAULT_REL_TOL * s[0] {
            return Err(invalid(format!("W has rank above {r}: σ_{}/σ_1 = {:e}", r + 1, next / s[0])));
        }
    }
    Ok(s)
}

/// Derivative of `W ↦ W†` at a rank-`r` matrix `W` along a fixed-rank
/// direction `Ẇ`:
///
/// ```text
/// −W† Ẇ W† + W† W†ᵀ Ẇᵀ (I − W W†) + (I − W† W) Ẇᵀ W†ᵀ W†
/// ```
///
/// Logs a warning when `Ẇ` has a normal component (the formula only
/// describes curves that stay at rank `r`).
pub fn pinv_derivative(w: &DenseMatrix, wdot: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    same_shape(w, wdot, "pinv_derivative")?;
    dense::ensure_finite(wdot, "Ẇ")?;
    exact_rank_spectrum(w, r)?;
    let wp = dense::pinv_truncated(w, r)?;
    let (s, c) = w.shape();
    let left_res = DenseMatrix::identity(s, s) - w * &wp;
    let right_res = DenseMatrix::identity(c, c) - &wp * w;

    let normal = dense::spectral_norm(&(&left_res * wdot * &right_res));
    if normal > 1e-8 * dense::spectral_norm(wdot) {
        warn!("pinv_derivative: direction is not tangent to the rank-{r} manifold (normal part {normal:e})");
    }

    let wdot_t = wdot.transpose();
    let wp_t = wp.transpose();
    Ok(-(&wp * wdot * &wp) + &wp * &wp_t * &wdot_t * &left_res + right_res * wdot_t * wp_t * &wp)
}

/// `‖(I − QQᵀ) Ẇ (I − ZZᵀ)‖₂`, which vanishes for velocities of fixed-rank
/// curves through `W = QΛZᵀ`.
pub fn fixed_rank_velocity_residual(svd_w: &CompactSvd, wdot: &DenseMatrix) -> Result<f64> {
    Ok(dense::spectral_norm(&tangent::normal_project(svd_w, wdot)?))
}

/// Splits `(W + E)_r = W + P_T(E) + R` and compares `‖R‖₂` with the explicit
/// remainder bound. Requires `rank(W) = r` and `‖E‖₂ ≤ c·σ_r(W)`.
pub fn truncation_expansion(w: &DenseMatrix, e: &DenseMatrix, r: usize, c_used: f64) -> Result<ExpansionReport> {
    check_c(c_used)?;
    same_shape(w, e, "truncation_expansion")?;
    dense::ensure_finite(e, "E")?;
    let s = exact_rank_spectrum(w, r)?;
    let gamma = s[r - 1];
    let e_norm = dense::spectral_norm(e);
    if e_norm > c_used * gamma {
        return Err(Error::HypothesisViolation(format!(
            "‖E‖₂ = {e_norm:e} exceeds c·γ = {:e}",
            c_used * gamma
        )));
    }
    let svd_w = dense::compact_svd(w, DEFAULT_REL_TOL)?.truncated(r)?;
    let projected = tangent::orthogonal_tangent_project(&svd_w, e)?;
    let truncated = dense::truncate_rank(&(w + e), r)?;
    let remainder = truncated - w - projected;
    let remainder_norm = dense::spectral_norm(&remainder);
    let bound = remainder_constant(c_used) * e_norm * e_norm / gamma;
    Ok(ExpansionReport { remainder_norm, bound, gamma, c_used, satisfied: remainder_norm <= bound + 1e-12 })
}

/// `DΦ_r(M)[E]`, which equals the oblique tangent projection of `E`.
pub fn cur_frechet_derivative(tp: &TangentPoint, e: &DenseMatrix) -> Result<DenseMatrix> {
    tangent::oblique_tangent_project(tp, e)
}

/// The two rank-`r` maps compared throughout the crate.
#[derive(Debug, Clone, Copy)]
pub enum TruncatedMap<'a> {
    /// `A ↦ Φ_r(A)` for a fixed selection.
    Cur { sel: &'a SelectionPair, rank: usize },
    /// `A ↦ A_r`.
    Svd { rank: usize },
}

impl TruncatedMap<'_> {
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        match *self {
            TruncatedMap::Cur { sel, rank } => cur::cur_rank_truncated(a, sel, rank),
            TruncatedMap::Svd { rank } => dense::truncate_rank(a, rank),
        }
    }
}

/// `(F(X + tE) − F(X − tE)) / 2t`.
pub fn central_difference<F>(f: F, x: &DenseMatrix, e: &DenseMatrix, t: f64) -> Result<DenseMatrix>
where
    F: Fn(&DenseMatrix) -> Result<DenseMatrix>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("step must be positive, got {t}")));
    }
    same_shape(x, e, "central_difference")?;
    let plus = f(&(x + e * t))?;
    let minus = f(&(x - e * t))?;
    Ok((plus - minus) / (2.0 * t))
}

/// Central finite-difference derivative of `map` at `m` in direction `e`.
pub fn finite_difference_derivative(
    map: TruncatedMap<'_>,
    m: &DenseMatrix,
    e: &DenseMatrix,
    t: f64,
) -> Result<DenseMatrix> {
    central_difference(|a| map.apply(a), m, e, t)
}

/// Step `DEFAULT_FD_STEP · max(1, ‖M‖_F)`.
pub fn default_fd_step(m: &DenseMatrix) -> f64 {
    DEFAULT_FD_STEP * dense::fro_norm(m).max(1.0)
}

/// `σ_r(SᵀMP)` at the base point.
pub fn intersection_gamma(tp: &TangentPoint) -> Result<f64> {
    let w = sampling::intersection(tp.base(), tp.selection())?;
    Ok(sampling::sigma_at_rank(&w, tp.rank()))
}

/// `‖SᵀEP‖₂ / σ_r(SᵀMP)`; the CUR expansion is controlled while this stays
/// at or below `c`.
pub fn cur_hypothesis_ratio(tp: &TangentPoint, e: &DenseMatrix) -> Result<f64> {
    let gamma = intersection_gamma(tp)?;
    let visible = sampling::intersection(e, tp.selection())?;
    Ok(dense::spectral_norm(&visible) / gamma)
}

/// `‖E‖₂ / σ_r(M)`.
pub fn svd_hypothesis_ratio(svd: &CompactSvd, e: &DenseMatrix) -> Result<f64> {
    let gamma = svd.smallest_sigma().ok_or_else(|| invalid("base point must have positive rank"))?;
    if e.shape() != (svd.nrows(), svd.ncols()) {
        return Err(invalid("perturbation shape does not match the base point"));
    }
    Ok(dense::spectral_norm(e) / gamma)
}

/// `Φ_r(M + E) − M` against the prediction `I(E)`. Requires
/// `‖SᵀEP‖₂ ≤ 0.2·σ_r(SᵀMP)`.
pub fn cur_first_order_residual(tp: &TangentPoint, e: &DenseMatrix) -> Result<FirstOrderReport> {
    let ratio = cur_hypothesis_ratio(tp, e)?;
    if ratio > DEFAULT_C {
        return Err(Error::HypothesisViolation(format!(
            "‖SᵀEP‖₂ / σ_r(SᵀMP) = {ratio:e} exceeds {DEFAULT_C}"
        )));
    }
    let m = tp.base();
    let predicted = tangent::oblique_tangent_project(tp, e)?;
    let diff = cur::cur_rank_truncated(&(m + e), tp.selection(), tp.rank())? - m;
    Ok(FirstOrderReport {
        residual: dense::fro_norm(&(&diff - &predicted)),
        first_order: dense::fro_norm(&predicted),
        observed: dense::fro_norm(&diff),
    })
}

/// `(M + E)_r − M` against the prediction `P_T(E)`. Requires
/// `‖E‖₂ ≤ 0.2·σ_r(M)`.
pub fn svd_first_order_residual(svd: &CompactSvd, e: &DenseMatrix) -> Result<FirstOrderReport> {
    let ratio = svd_hypothesis_ratio(svd, e)?;
    if ratio > DEFAULT_C {
        return Err(Error::HypothesisViolation(format!("‖E‖₂ / σ_r(M) = {ratio:e} exceeds {DEFAULT_C}")));
    }
    let m = svd.reconstruct();
    let predicted = tangent::orthogonal_tangent_project(svd, e)?;
    let diff = dense::truncate_rank(&(&m + e), svd.rank())? - &m;
    Ok(FirstOrderReport {
        residual: dense::fro_norm(&(&diff - &predicted)),
        first_order: dense::fro_norm(&predicted),
        observed: dense::fro_norm(&diff),
    })
}

/// `(‖(I − WW†) SᵀM‖_F, ‖MP (I − W†W)‖_F)` with `W = SᵀMP`; both vanish for
/// admissible selections.
pub fn cur_pinv_consequence_check(svd: &CompactSvd, sel: &SelectionPair) -> Result<(f64, f64)> {
    if !sampling::is_admissible(svd, sel, DEFAULT_ADMISSIBILITY_TOL)? {
        return Err(Error::Inadmissible("selection does not capture the rank-r spaces".into()));
    }
    let m = svd.reconstruct();
    let w = sampling::intersection(&m, sel)?;
    let wp = dense::pinv_truncated(&w, svd.rank())?;
    let rows = sampling::select_rows(&m, sel)?;
    let cols = sampling::select_cols(&m, sel)?;
    let left = &rows - &w * (&wp * &rows);
    let right = &cols - (&cols * &wp) * &w;
    Ok((dense::fro_norm(&left), dense::fro_norm(&right)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{fro_norm, gaussian_matrix, orthonormalize_gaussian};
    use nalgebra::DVector;

    fn embedded_diag() -> DenseMatrix {
        DenseMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.0]))
    }

    fn embedded_svd() -> CompactSvd {
        dense::compact_svd(&embedded_diag(), DEFAULT_REL_TOL).unwrap()
    }

    #[test]
    fn remainder_constant_at_default() {
        assert!((remainder_constant(0.2) - 8.8 / 0.6).abs() < 1e-14);
    }

    #[test]
    fn pinv_derivative_of_invertible_identity() {
        let h = gaussian_matrix(3, 3, 1);
        let d = pinv_derivative(&DenseMatrix::identity(3, 3), &h, 3).unwrap();
        assert!((d + &h).amax() < 1e-14);
    }

    #[test]
    fn pinv_derivative_matches_central_difference() {
        let w = embedded_diag();
        let wdot = tangent::orthogonal_tangent_project(&embedded_svd(), &gaussian_matrix(3, 3, 2)).unwrap();
        let d = pinv_derivative(&w, &wdot, 2).unwrap();
        let fd = central_difference(|a| dense::pinv_truncated(a, 2), &w, &wdot, 1e-5).unwrap();
        assert!((d - fd).amax() <= 1e-7);
    }

    #[test]
    fn pinv_derivative_sandwich_simplifies() {
        let w = embedded_diag();
        let delta = gaussian_matrix(3, 3, 3);
        let h = tangent::orthogonal_tangent_project(&embedded_svd(), &delta).unwrap();
        let wp = dense::pinv_truncated(&w, 2).unwrap();
        let lhs = &wp * h * &wp;
        let rhs = &wp * delta * &wp;
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn pinv_derivative_rank_checks() {
        let w = embedded_diag();
        let h = DenseMatrix::zeros(3, 3);
        assert!(pinv_derivative(&w, &h, 3).is_err());
        assert!(pinv_derivative(&w, &h, 1).is_err());
        assert!(pinv_derivative(&w, &DenseMatrix::zeros(2, 3), 2).is_err());
    }

    #[test]
    fn velocity_residual_examples() {
        let svd = embedded_svd();
        let tangent_dir = tangent::orthogonal_tangent_project(&svd, &gaussian_matrix(3, 3, 4)).unwrap();
        assert!(fixed_rank_velocity_residual(&svd, &tangent_dir).unwrap() < 1e-12);

        let normal_dir = tangent::normal_project(&svd, &gaussian_matrix(3, 3, 5)).unwrap();
        let res = fixed_rank_velocity_residual(&svd, &normal_dir).unwrap();
        assert!((res - dense::spectral_norm(&normal_dir)).abs() < 1e-14);

        let delta = gaussian_matrix(3, 3, 6);
        let w = embedded_diag();
        let vel = central_difference(|a| dense::truncate_rank(a, 2), &w, &delta, 1e-5).unwrap();
        assert!(fixed_rank_velocity_residual(&svd, &vel).unwrap() <= 1e-6 * fro_norm(&delta));
    }

    #[test]
    fn truncation_expansion_zero_perturbation() {
        let w = embedded_diag();
        let rep = truncation_expansion(&w, &DenseMatrix::zeros(3, 3), 2, DEFAULT_C).unwrap();
        assert!(rep.remainder_norm < 1e-15);
        assert_eq!(rep.bound, 0.0);
        assert!(rep.satisfied);
        assert_eq!(rep.gamma, 1.0);
    }

    #[test]
    fn truncation_expansion_tangent_perturbation() {
        let u = orthonormalize_gaussian(6, 2, 7).unwrap();
        let v = orthonormalize_gaussian(5, 2, 8).unwrap();
        let svd = CompactSvd::new(u, vec![3.0, 1.0], v).unwrap();
        let w = svd.reconstruct();
        let mut e = tangent::orthogonal_tangent_project(&svd, &gaussian_matrix(6, 5, 9)).unwrap();
        e *= 0.1 / dense::spectral_norm(&e);
        let rep = truncation_expansion(&w, &e, 2, 0.2).unwrap();
        let expect_bound = (12.0 - 3.2) / 0.6 * 0.01;
        assert!((rep.bound - expect_bound).abs() < 1e-12);
        assert!(rep.satisfied && rep.remainder_norm <= rep.bound);
    }

    #[test]
    fn truncation_expansion_hypothesis_enforced() {
        let w = embedded_diag();
        let e = DenseMatrix::identity(3, 3) * 0.5;
        assert!(matches!(truncation_expansion(&w, &e, 2, 0.2), Err(Error::HypothesisViolation(_))));
        assert!(truncation_expansion(&w, &e, 2, 0.5).is_err());
        assert!(truncation_expansion(&w, &e, 2, 0.0).is_err());
    }

    fn example_point() -> TangentPoint {
        let u = DenseMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
        let svd = CompactSvd::new(u.clone(), vec![1.0], u).unwrap();
        let sel = SelectionPair::new(vec![0], vec![0], 3, 3).unwrap();
        tangent::make_tangent_point(&svd, &sel).unwrap()
    }

    #[test]
    fn example_invisible_direction() {
        let tp = example_point();
        let mut e = DenseMatrix::zeros(3, 3);
        e[(2, 2)] = 1.0;
        assert_eq!(cur_frechet_derivative(&tp, &e).unwrap(), DenseMatrix::zeros(3, 3));
        let rep = cur_first_order_residual(&tp, &(e.clone() * 0.5)).unwrap();
        assert!(rep.residual < 1e-15 && rep.first_order == 0.0 && rep.observed < 1e-15);

        let sel = tp.selection();
        let fd = finite_difference_derivative(TruncatedMap::Cur { sel, rank: 1 }, tp.base(), &e, 1e-5).unwrap();
        assert!(fd.amax() < 1e-10);
        let (l, r) = cur_pinv_consequence_check(tp.svd(), sel).unwrap();
        assert!(l < 1e-15 && r < 1e-15);
    }

    #[test]
    fn example_svd_golden_distance() {
        let m = DenseMatrix::from_element(3, 3, 1.0 / 3.0);
        let mut a = m.clone();
        a[(2, 2)] += 2.0 / 3.0;
        let d = fro_norm(&(dense::truncate_rank(&a, 1).unwrap() - m));
        assert!((d - 33f64.sqrt() / 9.0).abs() < 1e-12);
        // outside the local hypothesis the residual helper refuses
        let svd = example_point().svd().clone();
        let mut e = DenseMatrix::zeros(3, 3);
        e[(2, 2)] = 2.0 / 3.0;
        assert!(matches!(svd_first_order_residual(&svd, &e), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn identity_map_difference_is_exact() {
        let x = gaussian_matrix(3, 4, 1);
        let e = gaussian_matrix(3, 4, 2);
        let d = central_difference(|a| Ok(a.clone()), &x, &e, 0.25).unwrap();
        assert!((d - &e).amax() < 1e-15);
        assert!(central_difference(|a| Ok(a.clone()), &x, &e, 0.0).is_err());
    }

    #[test]
    fn svd_normal_direction_is_second_order() {
        let u = orthonormalize_gaussian(6, 2, 11).unwrap();
        let v = orthonormalize_gaussian(5, 2, 12).unwrap();
        let svd = CompactSvd::new(u, vec![2.0, 1.0], v).unwrap();
        let mut e = tangent::normal_project(&svd, &gaussian_matrix(6, 5, 13)).unwrap();
        e /= fro_norm(&e);
        let rep = svd_first_order_residual(&svd, &(e * 1e-3)).unwrap();
        assert!(rep.first_order < 1e-15);
        assert!((rep.residual - rep.observed).abs() < 1e-15);
        assert!(rep.observed < 1e-5);
    }
}
