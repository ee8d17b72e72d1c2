use crate::error::{geometry, Result};
use crate::lattice::{BoxKind, CMat, LatticeBox, OperatorMatrix};
use nalgebra::DMatrix;

/// Which lattice the generator models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `N^d`: bonds leaving the half box are dropped.
    HalfLattice,
    /// `Z^d` on a periodic box in signed coordinates; the seam bond is dropped.
    Bilateral,
}

impl Flavor {
    pub fn for_kind(kind: BoxKind) -> Self {
        match kind {
            BoxKind::Half => Self::HalfLattice,
            BoxKind::Periodic => Self::Bilateral,
        }
    }
}

/// Dilation generator `A = sum_j A_j`, one term per axis.
///
/// On each axis `(A_j f)(n) = (i s_j / 2) [(n_j - 1/2) f(n - e_j) - (n_j + 1/2) f(n + e_j)]`
/// with `s_j = sign(r_j)`. The matrix is purely imaginary and hermitian, and
/// its entries grow linearly in the coordinate.
#[derive(Debug, Clone)]
pub struct ConjugateOp {
    op: OperatorMatrix,
    signs: Vec<f64>,
    flavor: Flavor,
}

impl ConjugateOp {
    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn into_op(self) -> OperatorMatrix {
        self.op
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn lattice(&self) -> &LatticeBox {
        self.op.lattice()
    }
}

/// Builds the generator; `signs` holds one entry per axis, each `+1` or `-1`.
pub fn build_conjugate(lattice: &LatticeBox, signs: &[f64], flavor: Flavor) -> Result<ConjugateOp> {
    if signs.len() != lattice.dims() {
        return geometry(format!("{} axis signs for a {}-dimensional box", signs.len(), lattice.dims()));
    }
    if Flavor::for_kind(lattice.kind()) != flavor {
        return geometry(format!("{flavor:?} generator requested on {lattice}"));
    }
    let n = lattice.size();
    let mut im = DMatrix::zeros(n, n);
    for site in 0..n {
        for (axis, &s) in signs.iter().enumerate() {
            let sign = s.signum();
            let x = lattice.coordinate(site, axis) as f64;
            // Only the backward bond is written; hermiticity fills the forward one.
            let Some(back) = lattice.neighbor(site, axis, -1) else { continue };
            if lattice.coordinate(back, axis) != lattice.coordinate(site, axis) - 1 {
                continue;
            }
            let v = 0.5 * sign * (x - 0.5);
            im[(site, back)] = v;
            im[(back, site)] = -v;
        }
    }
    let op = OperatorMatrix::new(lattice.clone(), CMat::imaginary(im), true)?;
    Ok(ConjugateOp {
        op,
        signs: signs.iter().map(|s| s.signum()).collect(),
        flavor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Embedding;
    use num_complex::Complex64;

    #[test]
    fn entries_follow_the_generator() {
        let lat = LatticeBox::line(12, BoxKind::Half).unwrap();
        for s in [1.0, -1.0] {
            let a = build_conjugate(&lat, &[s], Flavor::HalfLattice).unwrap();
            assert_eq!(a.op().entries().hermitian_residual(), 0.0);
            for n in 1..12usize {
                let x = n as f64;
                assert_eq!(a.op().get(n, n - 1), Complex64::new(0.0, 0.5 * s * (x - 0.5)));
                assert_eq!(a.op().get(n - 1, n), Complex64::new(0.0, -0.5 * s * (x - 0.5)));
            }
            for n in 0..12usize {
                for m in 0..12 {
                    if n.abs_diff(m) != 1 {
                        assert_eq!(a.op().get(n, m), Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn half_generator_is_compressed_bilateral_one() {
        for dims in [&[8usize][..], &[5, 4]] {
            let half = LatticeBox::new(dims, BoxKind::Half).unwrap();
            let wide: Vec<usize> = dims.iter().map(|d| 2 * d + 2).collect();
            let ring = LatticeBox::new(&wide, BoxKind::Periodic).unwrap();
            let signs = vec![1.0; dims.len()];
            let a_n = build_conjugate(&half, &signs, Flavor::HalfLattice).unwrap();
            let a_z = build_conjugate(&ring, &signs, Flavor::Bilateral).unwrap();
            let emb = Embedding::new(&ring, &half).unwrap();
            let compressed = emb.compress(a_z.op()).unwrap();
            assert_eq!(compressed.max_abs_diff(a_n.op()), 0.0);
        }
    }

    #[test]
    fn seam_bond_is_dropped() {
        let ring = LatticeBox::line(10, BoxKind::Periodic).unwrap();
        let a = build_conjugate(&ring, &[1.0], Flavor::Bilateral).unwrap();
        // Sites 4 and 5 hold signed coordinates 4 and -5.
        assert_eq!(a.op().get(5, 4), Complex64::new(0.0, 0.0));
        assert!(a.op().get(0, 9).im != 0.0);
        assert!(build_conjugate(&ring, &[1.0], Flavor::HalfLattice).is_err());
    }
}
