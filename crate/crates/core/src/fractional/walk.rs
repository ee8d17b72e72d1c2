//! Boundary walk deficits `D_h`.
//!
//! `D_h = R_+ (U + U^*)^h J_+ - (U_+ + U_+^*)^h` counts, for each pair of
//! half-line sites, the length-`h` walks on `Z` that visit a negative site.
//! It is a non-negative Hankel matrix supported on `n + m <= h - 2`.

use super::coeff::CoeffTable;
use crate::error::{geometry, LabError, Result};
use crate::lattice::{BoxKind, CMat, LatticeBox, OperatorMatrix};
use nalgebra::DMatrix;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMethod {
    /// Ballot-number Hankel formula.
    Factorized,
    /// Difference of walk-count matrix powers.
    BruteForce,
}

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.n + j]
    }

    fn add_at(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.n + j] += v;
    }

    /// Right multiplication by the path-graph adjacency `U + U^*` on `n` sites.
    fn times_path(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut v = 0;
                if j > 0 {
                    v += self.get(i, j - 1);
                }
                if j + 1 < n {
                    v += self.get(i, j + 1);
                }
                out.data[i * n + j] = v;
            }
        }
        out
    }

    fn block(&self, offset: usize, len: usize) -> Self {
        let mut out = Self::zeros(len);
        for i in 0..len {
            for j in 0..len {
                out.data[i * len + j] = self.get(offset + i, offset + j);
            }
        }
        out
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// Entries with `n + m = p` all equal.
    pub fn is_hankel(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i + 1 >= self.n || j == 0 || self.get(i, j) == self.get(i + 1, j - 1)))
    }
}

fn path_power(n: usize, h: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    for _ in 0..h {
        m = m.times_path();
    }
    m
}

fn check_length(len: usize, h: usize) -> Result<()> {
    if len < 4 * h {
        return Err(LabError::WindowOverflow(format!(
            "D_{h} needs a half box of at least {} sites, got {len}",
            4 * h
        )));
    }
    Ok(())
}

/// `D_h` on the first `len` half-line sites in exact integer arithmetic.
pub fn walk_deficit(len: usize, h: usize, method: WalkMethod) -> Result<IntMatrix> {
    check_length(len, h)?;
    match method {
        WalkMethod::BruteForce => {
            // Bilateral walks on [-h, len + h) and half-line walks on [0, len + h)
            // both contain every length-h walk between sites of [0, len).
            let full = path_power(len + 2 * h, h).block(h, len);
            let half = path_power(len + h, h).block(0, len);
            let mut out = IntMatrix::zeros(len);
            for (o, (a, b)) in out.data.iter_mut().zip(full.data.iter().zip(&half.data)) {
                *o = a - b;
            }
            Ok(out)
        }
        WalkMethod::Factorized => {
            let mut out = IntMatrix::zeros(len);
            if h < 2 {
                return Ok(out);
            }
            let table = CoeffTable::new(h)?;
            for p in (h % 2..=h - 2).step_by(2) {
                let beta = table
                    .beta(h, p)
                    .to_i128()
                    .ok_or_else(|| LabError::InvalidArgument(format!("beta_{h},{p} overflows i128")))?;
                // beta_{h,p} U^a P_0 U^{*b} for a + b = p.
                for a in 0..=p {
                    out.add_at(a, p - a, beta);
                }
            }
            Ok(out)
        }
    }
}

/// `D_h` as an operator on a one-dimensional half box.
pub fn d_h(lattice: &LatticeBox, h: usize, method: WalkMethod) -> Result<OperatorMatrix> {
    if lattice.dims() != 1 || lattice.kind() != BoxKind::Half {
        return geometry(format!("D_h is defined on a one-dimensional half box, got {lattice}"));
    }
    let m = walk_deficit(lattice.size(), h, method)?;
    OperatorMatrix::new(lattice.clone(), CMat::real(m.to_f64()), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_vanish() {
        for method in [WalkMethod::Factorized, WalkMethod::BruteForce] {
            assert_eq!(walk_deficit(16, 0, method).unwrap(), IntMatrix::zeros(16));
            assert_eq!(walk_deficit(16, 1, method).unwrap(), IntMatrix::zeros(16));
        }
    }

    #[test]
    fn d2_is_corner_projection() {
        let d = walk_deficit(16, 2, WalkMethod::BruteForce).unwrap();
        let mut p0 = IntMatrix::zeros(16);
        p0.add_at(0, 0, 1);
        assert_eq!(d, p0);
    }

    #[test]
    fn d3_has_two_ones() {
        let d = walk_deficit(16, 3, WalkMethod::BruteForce).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = i128::from((i, j) == (0, 1) || (i, j) == (1, 0));
                assert_eq!(d.get(i, j), expect);
            }
        }
    }

    #[test]
    fn methods_agree_and_structure_holds() {
        for h in 2..=12 {
            let f = walk_deficit(64, h, WalkMethod::Factorized).unwrap();
            let b = walk_deficit(64, h, WalkMethod::BruteForce).unwrap();
            assert_eq!(f, b, "h = {h}");
            assert!(f.is_hankel());
            for i in 0..64 {
                for j in 0..64 {
                    if i + j > h - 2 {
                        assert_eq!(f.get(i, j), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_is_at_most_h_minus_one() {
        let lat = LatticeBox::line(48, BoxKind::Half).unwrap();
        for h in 2..=12 {
            let d = d_h(&lat, h, WalkMethod::Factorized).unwrap();
            let sv = crate::lattice::linalg::singular_values(d.entries());
            let rank = crate::lattice::linalg::numerical_rank(&sv, 1e-9 * sv[0]);
            assert!(rank < h, "h = {h}: rank {rank}");
        }
    }

    #[test]
    fn small_box_overflows() {
        assert!(matches!(
            walk_deficit(10, 3, WalkMethod::Factorized),
            Err(LabError::WindowOverflow(_))
        ));
    }
}
