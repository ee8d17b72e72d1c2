//! Finite lattice geometry, shifts, restriction maps and spectral calculus.

mod dense;
mod eigen;
mod geometry;
pub mod linalg;
mod operator;
mod restrict;
mod shift;
mod weights;

pub use dense::CMat;
pub use eigen::{function_of, matrix_function, power_of, EigenSystem, PowerFloor, DEFAULT_FLOOR, ZERO_TOL};
pub use geometry::{signed_rep, BoxKind, LatticeBox};
pub use operator::{OperatorMatrix, HERMITIAN_TOL};
pub use restrict::{build_restriction, extend_matrix, Embedding};
pub use shift::{axis_laplacian, build_shift, laplacian};
pub use weights::{japanese, WeightVector};

/// Builds a box after validating the extents.
pub fn build_box(dims: usize, extents: &[usize], kind: BoxKind) -> crate::Result<LatticeBox> {
    if dims != extents.len() {
        return crate::error::geometry(format!("{dims} dimensions but {} extents", extents.len()));
    }
    LatticeBox::new(extents, kind)
}
