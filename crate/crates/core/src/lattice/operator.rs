use super::dense::CMat;
use super::geometry::LatticeBox;
use crate::error::{geometry, LabError, Result};
use nalgebra::DMatrix;

/// Entrywise hermiticity tolerance, relative to `max(1, max|M|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A finite section of a lattice operator on a given box.
///
/// When `hermitian` is set the stored entries are exactly conjugate-symmetric:
/// the constructor checks the residual and then symmetrizes.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    lattice: LatticeBox,
    entries: CMat,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn new(lattice: LatticeBox, entries: CMat, hermitian: bool) -> Result<Self> {
        let n = lattice.size();
        if entries.nrows() != n || entries.ncols() != n {
            return geometry(format!(
                "matrix is {}x{} but {lattice} has {n} sites",
                entries.nrows(),
                entries.ncols()
            ));
        }
        let mut entries = entries;
        if hermitian {
            let residual = entries.hermitian_residual();
            if residual > HERMITIAN_TOL * entries.max_abs().max(1.0) {
                return Err(LabError::NotHermitian { residual });
            }
            entries.symmetrize();
        }
        Ok(Self {
            lattice,
            entries,
            hermitian,
        })
    }

    pub fn real_symmetric(lattice: LatticeBox, m: DMatrix<f64>) -> Result<Self> {
        Self::new(lattice, CMat::real(m), true)
    }

    pub fn general(lattice: LatticeBox, entries: CMat) -> Result<Self> {
        Self::new(lattice, entries, false)
    }

    pub fn zeros(lattice: &LatticeBox) -> Self {
        let n = lattice.size();
        Self {
            lattice: lattice.clone(),
            entries: CMat::zeros(n, n),
            hermitian: true,
        }
    }

    pub fn identity(lattice: &LatticeBox) -> Self {
        Self {
            lattice: lattice.clone(),
            entries: CMat::identity(lattice.size()),
            hermitian: true,
        }
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.lattice.size()
    }

    pub fn get(&self, i: usize, j: usize) -> num_complex::Complex64 {
        self.entries.get(i, j)
    }

    pub fn re(&self) -> &DMatrix<f64> {
        self.entries.re()
    }

    pub fn is_real(&self) -> bool {
        self.entries.is_real()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            lattice: self.lattice.clone(),
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    fn same_box(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return geometry(format!("operands live on {} and {}", self.lattice, other.lattice));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        Ok(Self {
            lattice: self.lattice.clone(),
            entries: &self.entries + &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        Ok(Self {
            lattice: self.lattice.clone(),
            entries: &self.entries - &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Matrix product; the result is not flagged hermitian.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_box(other)?;
        Ok(Self {
            lattice: self.lattice.clone(),
            entries: &self.entries * &other.entries,
            hermitian: false,
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            entries: self.entries.scale(k),
            hermitian: self.hermitian,
        }
    }

    /// Re-checks and sets the hermitian flag.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new(self.lattice, self.entries, true)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.max_abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries).max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxKind;

    #[test]
    fn hermitian_flag_is_checked() {
        let b = LatticeBox::line(3, BoxKind::Half).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        assert!(matches!(
            OperatorMatrix::real_symmetric(b.clone(), m.clone()),
            Err(LabError::NotHermitian { .. })
        ));
        m[(1, 0)] = 1.0;
        let op = OperatorMatrix::real_symmetric(b, m).unwrap();
        assert_eq!(op.entries().hermitian_residual(), 0.0);
    }

    #[test]
    fn size_must_match_box() {
        let b = LatticeBox::line(3, BoxKind::Half).unwrap();
        assert!(OperatorMatrix::general(b, CMat::zeros(4, 4)).is_err());
    }

    #[test]
    fn arithmetic_requires_same_box() {
        let a = OperatorMatrix::identity(&LatticeBox::line(3, BoxKind::Half).unwrap());
        let b = OperatorMatrix::identity(&LatticeBox::line(3, BoxKind::Periodic).unwrap());
        assert!(a.try_add(&b).is_err());
        assert!(a.try_mul(&a).is_ok());
    }
}
