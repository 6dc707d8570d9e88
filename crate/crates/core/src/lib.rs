//! Fixed-index rank-truncated CUR maps and their local perturbation theory.
//!
//! For a rank-`r` matrix `M = UΣVᵀ` and a fixed choice of rows `S` and
//! columns `P`, the rank-truncated CUR map
//!
//! ```text
//! Φ_r(A) = AP (SᵀAP)_r† SᵀA
//! ```
//!
//! reproduces `M` exactly when the selection is admissible, and its
//! derivative at `M` is the oblique tangent projector
//! `E ↦ Π_U E + E Π_V − Π_U E Π_V`. This crate implements the maps, the
//! projectors, the supporting fixed-rank calculus and an experiment harness
//! that compares CUR against SVD truncation under structured perturbations.

pub mod calculus;
pub mod cli;
pub mod cur;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod perturb;
pub mod sampling;
pub mod tangent;
pub mod verify;

pub use dense::{CompactSvd, DenseMatrix};
pub use error::{Error, Result};
pub use sampling::SelectionPair;
pub use tangent::TangentPoint;
