//! Tangent-space projectors on the manifold of rank-`r` matrices.
//!
//! At `M = UΣVᵀ` the tangent space is `{UXᵀ + YVᵀ}`. Besides the orthogonal
//! projector onto it, an admissible selection `(S, P)` induces two oblique
//! projectors
//!
//! ```text
//! Π_U = U (SᵀU)† Sᵀ        Π_V = P (VᵀP)† Vᵀ
//! ```
//!
//! and the oblique tangent projector `E ↦ Π_U E + E Π_V − Π_U E Π_V`, which
//! is the derivative of the rank-truncated CUR map at `M`.

use crate::dense::{self, CompactSvd, DenseMatrix, DEFAULT_REL_TOL};
use crate::error::{invalid, Error, Result};
use crate::sampling::{self, SelectionPair, DEFAULT_ADMISSIBILITY_TOL};

/// An admissible base point together with its cached oblique projectors.
#[derive(Debug, Clone)]
pub struct TangentPoint {
    svd: CompactSvd,
    sel: SelectionPair,
    base: DenseMatrix,
    pi_u: DenseMatrix,
    pi_v: DenseMatrix,
}

/// Spectral distances between the oblique and orthogonal projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obliqueness {
    /// `‖Π_U − UUᵀ‖₂`
    pub delta_u: f64,
    /// `‖Π_V − VVᵀ‖₂`
    pub delta_v: f64,
    /// `‖Π_V‖₂`
    pub norm_pi_v: f64,
}

/// Builds the base point, failing if `(svd, sel)` is not admissible at
/// [`DEFAULT_ADMISSIBILITY_TOL`].
pub fn make_tangent_point(svd: &CompactSvd, sel: &SelectionPair) -> Result<TangentPoint> {
    let (left, right) = sampling::admissibility_margins(svd, sel)?;
    if svd.rank() == 0 {
        return Err(invalid("base point must have positive rank"));
    }
    if left < DEFAULT_ADMISSIBILITY_TOL || right < DEFAULT_ADMISSIBILITY_TOL {
        return Err(Error::Inadmissible(format!(
            "σ_min(SᵀU) = {left:e}, σ_min(VᵀP) = {right:e}, threshold {DEFAULT_ADMISSIBILITY_TOL:e}"
        )));
    }
    let (m, n) = (sel.m(), sel.n());

    // Π_U = U (SᵀU)† Sᵀ: only the selected columns are non-zero.
    let su = svd.left().select_rows(sel.rows());
    let block = svd.left() * dense::pinv(&su, DEFAULT_REL_TOL)?;
    let mut pi_u = DenseMatrix::zeros(m, m);
    for (k, &i) in sel.rows().iter().enumerate() {
        pi_u.set_column(i, &block.column(k));
    }

    // Π_V = P (VᵀP)† Vᵀ: only the selected rows are non-zero.
    let vp = svd.right().select_rows(sel.cols()).transpose();
    let block = dense::pinv(&vp, DEFAULT_REL_TOL)? * svd.right().transpose();
    let mut pi_v = DenseMatrix::zeros(n, n);
    for (k, &j) in sel.cols().iter().enumerate() {
        pi_v.set_row(j, &block.row(k));
    }

    Ok(TangentPoint { svd: svd.clone(), sel: sel.clone(), base: svd.reconstruct(), pi_u, pi_v })
}

impl TangentPoint {
    pub fn svd(&self) -> &CompactSvd {
        &self.svd
    }

    pub fn selection(&self) -> &SelectionPair {
        &self.sel
    }

    /// `M = UΣVᵀ`.
    pub fn base(&self) -> &DenseMatrix {
        &self.base
    }

    /// `Π_U` (`m×m`).
    pub fn pi_u(&self) -> &DenseMatrix {
        &self.pi_u
    }

    /// `Π_V` (`n×n`).
    pub fn pi_v(&self) -> &DenseMatrix {
        &self.pi_v
    }

    pub fn rank(&self) -> usize {
        self.svd.rank()
    }
}

fn check_dims(svd: &CompactSvd, z: &DenseMatrix) -> Result<()> {
    if z.nrows() != svd.nrows() || z.ncols() != svd.ncols() {
        return Err(invalid(format!(
            "direction is {}x{} but the base point is {}x{}",
            z.nrows(),
            z.ncols(),
            svd.nrows(),
            svd.ncols()
        )));
    }
    Ok(())
}

/// `UUᵀZ + ZVVᵀ − UUᵀZVVᵀ`.
pub fn orthogonal_tangent_project(svd: &CompactSvd, z: &DenseMatrix) -> Result<DenseMatrix> {
    check_dims(svd, z)?;
    let (u, v) = (svd.left(), svd.right());
    let uz = u * (u.transpose() * z);
    let zv = (z * v) * v.transpose();
    let uzv = (&uz * v) * v.transpose();
    Ok(uz + zv - uzv)
}

/// `(I − UUᵀ) Z (I − VVᵀ)`.
pub fn normal_project(svd: &CompactSvd, z: &DenseMatrix) -> Result<DenseMatrix> {
    check_dims(svd, z)?;
    let (u, v) = (svd.left(), svd.right());
    let left = z - u * (u.transpose() * z);
    Ok(&left - (&left * v) * v.transpose())
}

/// `Π_U E + E Π_V − Π_U E Π_V`.
pub fn oblique_tangent_project(tp: &TangentPoint, e: &DenseMatrix) -> Result<DenseMatrix> {
    check_dims(&tp.svd, e)?;
    let pe = &tp.pi_u * e;
    let ep = e * &tp.pi_v;
    let pep = &pe * &tp.pi_v;
    Ok(pe + ep - pep)
}

pub fn obliqueness(tp: &TangentPoint) -> Obliqueness {
    let pu = tp.svd.left() * tp.svd.left().transpose();
    let pv = tp.svd.right() * tp.svd.right().transpose();
    Obliqueness {
        delta_u: dense::spectral_norm(&(&tp.pi_u - pu)),
        delta_v: dense::spectral_norm(&(&tp.pi_v - pv)),
        norm_pi_v: dense::spectral_norm(&tp.pi_v),
    }
}

/// Both sides of the obliqueness comparison
/// `‖I(E) − P_T(E)‖₂ ≤ (δ_U (1 + ‖Π_V‖₂) + 2 δ_V) ‖E‖₂`.
pub fn comparison_gap(tp: &TangentPoint, e: &DenseMatrix) -> Result<(f64, f64)> {
    let oblique = oblique_tangent_project(tp, e)?;
    let orthogonal = orthogonal_tangent_project(&tp.svd, e)?;
    let lhs = dense::spectral_norm(&(oblique - orthogonal));
    let ob = obliqueness(tp);
    let rhs = (ob.delta_u * (1.0 + ob.norm_pi_v) + 2.0 * ob.delta_v) * dense::spectral_norm(e);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{fro_norm, gaussian_matrix, orthonormalize_gaussian};

    fn example_point() -> TangentPoint {
        let u = DenseMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
        let svd = CompactSvd::new(u.clone(), vec![1.0], u).unwrap();
        let sel = SelectionPair::new(vec![0], vec![0], 3, 3).unwrap();
        make_tangent_point(&svd, &sel).unwrap()
    }

    fn small_point(seed: u64) -> TangentPoint {
        let u = orthonormalize_gaussian(9, 2, seed).unwrap();
        let v = orthonormalize_gaussian(7, 2, seed + 1).unwrap();
        let svd = CompactSvd::new(u, vec![1.5, 0.5], v).unwrap();
        let sel = SelectionPair::new(vec![0, 3, 5, 8], vec![1, 2, 6], 9, 7).unwrap();
        make_tangent_point(&svd, &sel).unwrap()
    }

    #[test]
    fn example_oblique_projector() {
        let tp = example_point();
        let mut expect = DenseMatrix::zeros(3, 3);
        expect.column_mut(0).fill(1.0);
        assert!((tp.pi_u() - &expect).amax() < 1e-15);
        assert!((tp.pi_v() - expect.transpose()).amax() < 1e-15);
    }

    #[test]
    fn example_obliqueness_matches_hand_spectral_norm() {
        // Π_U − (1/3)·ones = [[2/3,-1/3,-1/3],[2/3,-1/3,-1/3],[2/3,-1/3,-1/3]]
        // = 1·[2/3,-1/3,-1/3] outer; spectral norm = ‖1‖·‖row‖ = √3·√(6/9) = √2.
        let ob = obliqueness(&example_point());
        assert!((ob.delta_u - 2f64.sqrt()).abs() < 1e-14);
        assert!((ob.delta_v - 2f64.sqrt()).abs() < 1e-14);
        assert!((ob.norm_pi_v - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inadmissible_rejected() {
        let coord = DenseMatrix::identity(3, 1);
        let svd = CompactSvd::new(coord.clone(), vec![1.0], coord).unwrap();
        let sel = SelectionPair::new(vec![2], vec![0], 3, 3).unwrap();
        assert!(matches!(make_tangent_point(&svd, &sel), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn full_selection_gives_orthogonal_projectors() {
        let u = orthonormalize_gaussian(6, 2, 4).unwrap();
        let v = orthonormalize_gaussian(5, 2, 5).unwrap();
        let svd = CompactSvd::new(u.clone(), vec![2.0, 1.0], v.clone()).unwrap();
        let tp = make_tangent_point(&svd, &SelectionPair::full(6, 5).unwrap()).unwrap();
        assert!((tp.pi_u() - &u * u.transpose()).amax() < 1e-12);
        assert!((tp.pi_v() - &v * v.transpose()).amax() < 1e-12);
        let ob = obliqueness(&tp);
        assert!(ob.delta_u < 1e-12 && ob.delta_v < 1e-12);
        let e = gaussian_matrix(6, 5, 6);
        let (lhs, _) = comparison_gap(&tp, &e).unwrap();
        assert!(lhs < 1e-12);
        let a = oblique_tangent_project(&tp, &e).unwrap();
        let b = orthogonal_tangent_project(&svd, &e).unwrap();
        assert!(fro_norm(&(a - b)) < 1e-12 * fro_norm(&e));
    }

    #[test]
    fn orthogonal_projector_examples() {
        let tp = small_point(10);
        let svd = tp.svd();
        let (u, v) = (svd.left(), svd.right());
        let z = u * gaussian_matrix(2, 7, 1) + gaussian_matrix(9, 2, 2) * v.transpose();
        assert!(fro_norm(&(orthogonal_tangent_project(svd, &z).unwrap() - &z)) < 1e-12 * fro_norm(&z));
        assert!(fro_norm(&normal_project(svd, &z).unwrap()) < 1e-12 * fro_norm(&z));

        let g = gaussian_matrix(9, 7, 3);
        let nz = normal_project(svd, &g).unwrap();
        assert!(fro_norm(&orthogonal_tangent_project(svd, &nz).unwrap()) < 1e-12);

        let pz = orthogonal_tangent_project(svd, &g).unwrap();
        let ppz = orthogonal_tangent_project(svd, &pz).unwrap();
        assert!(fro_norm(&(&ppz - &pz)) < 1e-12 * fro_norm(&g));
        assert!(fro_norm(&(&pz + &nz - &g)) < 1e-13 * fro_norm(&g));
        assert!(pz.dot(&nz).abs() < 1e-10 * g.norm_squared());
    }

    #[test]
    fn oblique_projector_properties() {
        let tp = small_point(20);
        let svd = tp.svd();
        let (u, v) = (svd.left(), svd.right());
        assert!((tp.pi_u() * u - u).amax() < 1e-10);
        assert!((v.transpose() * tp.pi_v() - v.transpose()).amax() < 1e-10);
        assert!((tp.pi_u() * tp.pi_u() - tp.pi_u()).amax() < 1e-10);
        assert!((tp.pi_v() * tp.pi_v() - tp.pi_v()).amax() < 1e-10);

        let e = gaussian_matrix(9, 7, 21);
        let ie = oblique_tangent_project(&tp, &e).unwrap();
        assert!(fro_norm(&normal_project(svd, &ie).unwrap()) < 1e-10 * fro_norm(&e));
        let iie = oblique_tangent_project(&tp, &ie).unwrap();
        assert!(fro_norm(&(iie - &ie)) < 1e-10 * fro_norm(&e));

        let z = u * gaussian_matrix(2, 7, 22) + gaussian_matrix(9, 2, 23) * v.transpose();
        let iz = oblique_tangent_project(&tp, &z).unwrap();
        assert!(fro_norm(&(iz - &z)) < 1e-10 * fro_norm(&z));

        let invisible = sampling::zero_cross(&e, tp.selection());
        let k = oblique_tangent_project(&tp, &invisible).unwrap();
        assert!(fro_norm(&k) <= 1e-13 * fro_norm(&invisible));

        let ob = obliqueness(&tp);
        assert!(ob.delta_u >= 0.0 && dense::spectral_norm(tp.pi_u()) >= 1.0 - 1e-12);
        let (lhs, rhs) = comparison_gap(&tp, &e).unwrap();
        assert!(lhs <= rhs + 1e-10);
        assert_eq!(comparison_gap(&tp, &DenseMatrix::zeros(9, 7)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let tp = small_point(1);
        assert!(oblique_tangent_project(&tp, &DenseMatrix::zeros(7, 9)).is_err());
        assert!(orthogonal_tangent_project(tp.svd(), &DenseMatrix::zeros(9, 6)).is_err());
    }
}
