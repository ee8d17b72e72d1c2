use super::dense::CMat;
use super::geometry::LatticeBox;
use super::operator::OperatorMatrix;
use crate::error::{geometry, Result};
use nalgebra::DMatrix;

/// The shift `(U g)(n) = g(n - e_axis)` and its adjoint.
///
/// On a half box the shift drops the mass that leaves through the far edge,
/// so `U^dagger U = I - P_last` rather than the identity.
pub fn build_shift(lattice: &LatticeBox, axis: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if axis >= lattice.dims() {
        return geometry(format!("axis {axis} outside a {}-dimensional box", lattice.dims()));
    }
    let n = lattice.size();
    let mut u = DMatrix::zeros(n, n);
    for site in 0..n {
        if let Some(src) = lattice.neighbor(site, axis, -1) {
            u[(site, src)] = 1.0;
        }
    }
    let adj = u.transpose();
    Ok((
        OperatorMatrix::general(lattice.clone(), CMat::real(u))?,
        OperatorMatrix::general(lattice.clone(), CMat::real(adj))?,
    ))
}

/// Nearest-neighbour Laplacian `sum_j (2 - U_j - U_j^dagger)` on the box.
pub fn laplacian(lattice: &LatticeBox) -> OperatorMatrix {
    let n = lattice.size();
    let mut m = DMatrix::zeros(n, n);
    for axis in 0..lattice.dims() {
        for site in 0..n {
            m[(site, site)] += 2.0;
            if let Some(nb) = lattice.neighbor(site, axis, 1) {
                m[(site, nb)] -= 1.0;
                m[(nb, site)] -= 1.0;
            }
        }
    }
    OperatorMatrix::real_symmetric(lattice.clone(), m).expect("Laplacian is symmetric by construction")
}

/// One-axis Laplacian `2 - U_axis - U_axis^dagger`.
pub fn axis_laplacian(lattice: &LatticeBox, axis: usize) -> Result<OperatorMatrix> {
    if axis >= lattice.dims() {
        return geometry(format!("axis {axis} outside a {}-dimensional box", lattice.dims()));
    }
    let n = lattice.size();
    let mut m = DMatrix::zeros(n, n);
    for site in 0..n {
        m[(site, site)] = 2.0;
        if let Some(nb) = lattice.neighbor(site, axis, 1) {
            m[(site, nb)] -= 1.0;
            m[(nb, site)] -= 1.0;
        }
    }
    OperatorMatrix::real_symmetric(lattice.clone(), m)
}
