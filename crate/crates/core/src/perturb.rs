//! Unit-Frobenius perturbation generators.
//!
//! All four families start from one seeded Gaussian matrix `G`:
//!
//! * generic: `G / ‖G‖_F`
//! * invisible: `G` with the selected rows and columns zeroed, normalised
//! * normal: `(I − UUᵀ) G (I − VVᵀ)`, normalised
//! * visible(α): `Ê_inv + α Ê_vis`, normalised, where `Ê_inv` and `Ê_vis` are
//!   the separately normalised off-cross and on-cross parts of the same `G`

use crate::dense::{self, CompactSvd, DenseMatrix};
use crate::error::{invalid, Error, Result};
use crate::sampling::{self, SelectionPair};
use crate::tangent;

/// Perturbation family; `Visible` carries the visibility parameter `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationFamily {
    Generic,
    Invisible,
    Normal,
    Visible { alpha: f64 },
}

/// A family plus the seed of its Gaussian draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub family: PerturbationFamily,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(family: PerturbationFamily, seed: u64) -> Self {
        Self { family, seed }
    }

    /// Draws the perturbation for the base point `svd` and selection `sel`.
    pub fn generate(&self, svd: &CompactSvd, sel: &SelectionPair) -> Result<DenseMatrix> {
        match self.family {
            PerturbationFamily::Generic => Ok(generic_perturbation(sel.m(), sel.n(), self.seed)),
            PerturbationFamily::Invisible => invisible_perturbation(sel, self.seed),
            PerturbationFamily::Normal => normal_perturbation(svd, self.seed),
            PerturbationFamily::Visible { alpha } => visible_perturbation(sel, alpha, self.seed),
        }
    }
}

fn normalized(a: DenseMatrix, what: &str) -> Result<DenseMatrix> {
    let norm = dense::fro_norm(&a);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateInput(format!("{what} has zero Frobenius norm")));
    }
    Ok(a / norm)
}

/// `G / ‖G‖_F`.
pub fn generic_perturbation(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let g = dense::gaussian_matrix(m, n, seed);
    let norm = dense::fro_norm(&g);
    g / norm
}

/// Unit perturbation whose selected rows and columns are exactly zero, so
/// `SᵀE = 0` and `EP = 0` hold bit-for-bit.
pub fn invisible_perturbation(sel: &SelectionPair, seed: u64) -> Result<DenseMatrix> {
    if sel.s() == sel.m() || sel.c() == sel.n() {
        return Err(Error::DegenerateInput("selection leaves no unsampled rows or columns".into()));
    }
    let g = dense::gaussian_matrix(sel.m(), sel.n(), seed);
    normalized(sampling::zero_cross(&g, sel), "invisible part of G")
}

/// Unit perturbation in the normal space at `M = UΣVᵀ`.
pub fn normal_perturbation(svd: &CompactSvd, seed: u64) -> Result<DenseMatrix> {
    let (m, n) = (svd.nrows(), svd.ncols());
    if svd.rank() >= m.min(n) {
        return Err(Error::DegenerateInput(format!(
            "rank {} leaves no normal space in {m}x{n}",
            svd.rank()
        )));
    }
    let g = dense::gaussian_matrix(m, n, seed);
    // Projecting twice removes the O(ε)-relative leakage of a single pass.
    let once = tangent::normal_project(svd, &g)?;
    let twice = tangent::normal_project(svd, &once)?;
    normalized(twice, "normal part of G")
}

/// The two separately normalised components `(Ê_inv, Ê_vis)` of one draw.
pub fn visibility_components(sel: &SelectionPair, seed: u64) -> Result<(DenseMatrix, DenseMatrix)> {
    let g = dense::gaussian_matrix(sel.m(), sel.n(), seed);
    let inv = sampling::zero_cross(&g, sel);
    let vis = &g - &inv;
    Ok((normalized(inv, "invisible part of G")?, normalized(vis, "visible part of G")?))
}

/// `(Ê_inv + α Ê_vis) / ‖Ê_inv + α Ê_vis‖_F`.
pub fn visible_perturbation(sel: &SelectionPair, alpha: f64, seed: u64) -> Result<DenseMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive and finite, got {alpha}")));
    }
    let (inv, vis) = visibility_components(sel, seed)?;
    normalized(inv + vis * alpha, "mixed perturbation")
}
