//! Heat kernels of the nearest-neighbour Laplacian on `Z`, `N` and `N^d`.
//!
//! `p_t(k) = e^-2t I_|k|(2t)` is the law at time `t` of the difference of two
//! independent rate-one Poisson clocks, which gives the Chernoff tail bound
//! used to certify truncated tables.

use super::bessel::{bessel_i_scaled, recurrence_scaled_table, series_scaled};
use crate::error::{geometry, LabError, Result};
use crate::lattice::{BoxKind, CMat, LatticeBox, OperatorMatrix};
use nalgebra::DMatrix;

/// Tail mass below which a table is considered to cover all of `Z`.
const NEGLIGIBLE_TAIL: f64 = 1e-18;

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::Domain(format!("heat time must be finite and > 0, got {t}")));
    }
    Ok(())
}

/// `sum_{|k| > range} p_t(k) <= 2 exp(2t (cosh th - 1) - th (range + 1))`
/// at the optimal `th = asinh((range + 1) / 2t)`.
pub fn gaussian_tail_bound(t: f64, range: usize) -> f64 {
    let a = (range + 1) as f64;
    let theta = (a / (2.0 * t)).asinh();
    (2.0 * (2.0 * t * (theta.cosh() - 1.0) - theta * a).exp()).min(1.0)
}

/// Smallest range whose tail bound is below [`NEGLIGIBLE_TAIL`].
fn covering_range(t: f64) -> usize {
    let mut k = (2.0 * t).ceil() as usize + 8;
    while gaussian_tail_bound(t, k) > NEGLIGIBLE_TAIL {
        k += 1 + k / 8;
    }
    k
}

/// `p_t(k)` for `|k| <= range`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    t: f64,
    values: Vec<f64>,
}

impl KernelTable {
    pub fn new(t: f64, range: usize) -> Result<Self> {
        check_time(t)?;
        let x = 2.0 * t;
        let values = if range <= 30 && x <= 50.0 {
            (0..=range as u32)
                .map(|k| series_scaled(k, x).map(|s| s.scaled))
                .collect::<Result<Vec<_>>>()?
        } else {
            let order = u32::try_from(range)
                .map_err(|_| LabError::Domain(format!("kernel range {range} is too large")))?;
            recurrence_scaled_table(order, x)?
        };
        Ok(Self { t, values })
    }

    /// A table wide enough to reach `min_range` and to make the tail negligible.
    pub fn covering(t: f64, min_range: usize) -> Result<Self> {
        check_time(t)?;
        Self::new(t, min_range.max(covering_range(t)))
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn range(&self) -> usize {
        self.values.len() - 1
    }

    /// `p_t(k)`, zero outside the tabulated range.
    pub fn at(&self, k: i64) -> f64 {
        self.values.get(k.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sum_{|k| <= range} p_t(k)`.
    pub fn mass(&self) -> f64 {
        self.values[0] + 2.0 * self.values[1..].iter().sum::<f64>()
    }

    pub fn tail_bound(&self) -> f64 {
        gaussian_tail_bound(self.t, self.range())
    }

    /// `sum_w p_t(k + w len)` over the tabulated range.
    pub fn wrapped(&self, k: i64, len: usize) -> f64 {
        let len = len as i64;
        let range = self.range() as i64;
        let base = k.rem_euclid(len);
        let mut s = 0.0;
        let mut j = base - ((base + range) / len) * len;
        while j <= range {
            s += self.at(j);
            j += len;
        }
        s
    }

    /// `p_t(n - m) - p_t(n + m + 2)`.
    pub fn halfline(&self, n: usize, m: usize) -> f64 {
        self.at(n as i64 - m as i64) - self.at(n as i64 + m as i64 + 2)
    }

    /// `sum_J (-1)^|J| prod_j p_t(n_j - (R_J m)_j)` with `(R_J m)_j = -m_j - 2`.
    pub fn dirichlet(&self, n: &[usize], m: &[usize]) -> f64 {
        let d = n.len();
        let mut acc = 0.0;
        for mask in 0u32..(1 << d) {
            let mut prod = 1.0;
            for j in 0..d {
                let image = if mask >> j & 1 == 1 { -(m[j] as i64) - 2 } else { m[j] as i64 };
                prod *= self.at(n[j] as i64 - image);
            }
            if mask.count_ones() % 2 == 0 {
                acc += prod;
            } else {
                acc -= prod;
            }
        }
        acc
    }

    /// `sum_{J != empty} (-1)^(|J|+1) prod_j p_t(n_j - (R_J m)_j)`, the free
    /// kernel minus the Dirichlet kernel without cancellation.
    pub fn image_sum(&self, n: &[usize], m: &[usize]) -> f64 {
        let d = n.len();
        let mut acc = 0.0;
        for mask in 1u32..(1 << d) {
            let mut prod = 1.0;
            for j in 0..d {
                let image = if mask >> j & 1 == 1 { -(m[j] as i64) - 2 } else { m[j] as i64 };
                prod *= self.at(n[j] as i64 - image);
            }
            if mask.count_ones() % 2 == 1 {
                acc += prod;
            } else {
                acc -= prod;
            }
        }
        acc
    }

    /// `prod_j p_t(n_j - m_j)`.
    pub fn product(&self, n: &[usize], m: &[usize]) -> f64 {
        n.iter().zip(m).map(|(&a, &b)| self.at(a as i64 - b as i64)).product()
    }
}

/// `p_t(k) = e^-2t I_|k|(2t)`.
pub fn p_t(t: f64, k: i64) -> Result<f64> {
    check_time(t)?;
    let order = u32::try_from(k.unsigned_abs()).map_err(|_| LabError::Domain(format!("kernel offset {k} is too large")))?;
    bessel_i_scaled(order, 2.0 * t)
}

/// Half-line Dirichlet kernel `p_t(n - m) - p_t(n + m + 2)`.
pub fn kernel_halfline(t: f64, n: usize, m: usize) -> Result<f64> {
    let table = KernelTable::new(t, n + m + 2)?;
    Ok(table.halfline(n, m))
}

/// `N^d` Dirichlet kernel by inclusion-exclusion over coordinate reflections.
pub fn kernel_nd(t: f64, n: &[usize], m: &[usize]) -> Result<f64> {
    if n.len() != m.len() || n.is_empty() {
        return geometry(format!("site dimensions differ: {} vs {}", n.len(), m.len()));
    }
    let reach = n.iter().zip(m).map(|(a, b)| a + b + 2).max().unwrap_or(0);
    let table = KernelTable::new(t, reach)?;
    Ok(table.dirichlet(n, m))
}

fn site_matrix(lattice: &LatticeBox, f: impl Fn(&[usize], &[usize]) -> f64) -> DMatrix<f64> {
    let sites: Vec<Vec<usize>> = lattice.sites().collect();
    let n = sites.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = f(&sites[i], &sites[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn max_extent(lattice: &LatticeBox) -> usize {
    lattice.extents().iter().copied().max().unwrap_or(0)
}

/// `e^{-t Delta_Z^d}` seen on a box: restricted to the sites of a half box, or
/// wrapped around a periodic box.
pub fn full_kernel(lattice: &LatticeBox, t: f64) -> Result<OperatorMatrix> {
    let table = KernelTable::covering(t, 2 * max_extent(lattice) + 2)?;
    let m = match lattice.kind() {
        BoxKind::Half => site_matrix(lattice, |a, b| table.product(a, b)),
        BoxKind::Periodic => site_matrix(lattice, |a, b| {
            a.iter()
                .zip(b)
                .enumerate()
                .map(|(axis, (&x, &y))| table.wrapped(x as i64 - y as i64, lattice.extent(axis)))
                .product()
        }),
    };
    OperatorMatrix::new(lattice.clone(), CMat::real(m), true)
}

/// Free minus Dirichlet kernel on the sites of a half box, summed over images.
pub fn image_kernel(lattice: &LatticeBox, t: f64) -> Result<OperatorMatrix> {
    if lattice.kind() != BoxKind::Half {
        return geometry(format!("image kernel needs a half box, got {lattice}"));
    }
    let table = KernelTable::covering(t, 2 * max_extent(lattice) + 2)?;
    let m = site_matrix(lattice, |a, b| table.image_sum(a, b));
    OperatorMatrix::new(lattice.clone(), CMat::real(m), true)
}

/// `e^{-t Delta_N^d}` on the sites of a half box, from the infinite-lattice kernel.
pub fn dirichlet_kernel(lattice: &LatticeBox, t: f64) -> Result<OperatorMatrix> {
    if lattice.kind() != BoxKind::Half {
        return geometry(format!("Dirichlet kernel needs a half box, got {lattice}"));
    }
    let table = KernelTable::covering(t, 2 * max_extent(lattice) + 2)?;
    let m = site_matrix(lattice, |a, b| table.dirichlet(a, b));
    OperatorMatrix::new(lattice.clone(), CMat::real(m), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{assemble_nd, FracOrder, PowerMethod};
    use crate::lattice::{laplacian, matrix_function};
    use proptest::prelude::*;

    #[test]
    fn table_is_symmetric_and_stochastic() {
        let table = KernelTable::new(1.0, 60).unwrap();
        assert!((table.mass() - 1.0).abs() < 1e-12);
        for k in 0..=60 {
            assert_eq!(table.at(k), table.at(-k));
            assert!(table.at(k) >= 0.0);
        }
        for &t in &[0.1, 1.0, 5.0, 40.0, 300.0] {
            for range in [5usize, 20, 80, 400] {
                let table = KernelTable::new(t, range).unwrap();
                let deficit = 1.0 - table.mass();
                assert!(deficit >= -1e-13, "t={t} range={range}");
                assert!(deficit <= table.tail_bound() + 1e-13, "t={t} range={range}: {deficit}");
            }
        }
    }

    #[test]
    fn free_function_matches_table() {
        let table = KernelTable::new(2.5, 40).unwrap();
        for k in -40..=40 {
            let v = p_t(2.5, k).unwrap();
            assert!((v - table.at(k)).abs() <= 1e-13 * v.max(1e-300));
        }
        assert!(p_t(0.0, 1).is_err());
    }

    #[test]
    fn periodic_kernel_matches_spectral_exponential() {
        let lat = LatticeBox::line(256, BoxKind::Periodic).unwrap();
        let spectral = matrix_function(&laplacian(&lat), |x| (-x).exp()).unwrap();
        let table = KernelTable::new(1.0, 200).unwrap();
        let centre = 128;
        for j in 0..256 {
            let expect = table.at(j as i64 - centre as i64);
            assert!((spectral.get(centre, j).re - expect).abs() < 1e-10, "j={j}");
        }
        let wrapped = full_kernel(&lat, 1.0).unwrap();
        assert!(wrapped.max_abs_diff(&spectral) < 1e-10);
    }

    #[test]
    fn halfline_matches_spectral_exponential() {
        let lat = LatticeBox::line(200, BoxKind::Half).unwrap();
        let spectral = matrix_function(&laplacian(&lat), |x| (-x).exp()).unwrap();
        let table = KernelTable::new(1.0, 410).unwrap();
        for n in 75..125 {
            for m in 75..125 {
                assert!((spectral.get(n, m).re - table.halfline(n, m)).abs() < 1e-10);
            }
        }
        let direct = kernel_halfline(1.0, 0, 0).unwrap();
        assert_eq!(direct, table.at(0) - table.at(2));
    }

    #[test]
    fn halfline_tends_to_identity() {
        let t = 1e-6;
        assert!((kernel_halfline(t, 3, 3).unwrap() - 1.0).abs() < 1e-5);
        assert!(kernel_halfline(t, 3, 4).unwrap().abs() < 1e-5);
        assert!(kernel_halfline(t, 0, 0).unwrap() > 1.0 - 1e-5);
    }

    #[test]
    fn two_dimensional_kernel_matches_spectral_exponential() {
        let lat = LatticeBox::new(&[30, 30], BoxKind::Half).unwrap();
        let order = FracOrder::new(&[1.0, 1.0]).unwrap();
        let h = assemble_nd(&order, &lat, PowerMethod::Spectral).unwrap();
        let spectral = matrix_function(&h, |x| (-x).exp()).unwrap();
        let kernel = dirichlet_kernel(&lat, 1.0).unwrap();
        // The far faces of the box are 20 sites from the central block.
        for a in 5..12 {
            for b in 5..12 {
                let i = lat.index(&[a, b]).unwrap();
                for c in 5..12 {
                    for e in 5..12 {
                        let j = lat.index(&[c, e]).unwrap();
                        assert!((spectral.get(i, j).re - kernel.get(i, j).re).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let (s, t) = (0.7, 1.3);
        let ts = KernelTable::new(s, 500).unwrap();
        let tt = KernelTable::new(t, 500).unwrap();
        let tst = KernelTable::new(s + t, 500).unwrap();
        for n in [0usize, 1, 4, 10] {
            for m in [0usize, 2, 7] {
                let sum: f64 = (0..200).map(|k| ts.halfline(n, k) * tt.halfline(k, m)).sum();
                assert!((sum - tst.halfline(n, m)).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn one_dimensional_inclusion_exclusion_is_exact(t in 0.05f64..20.0, n in 0usize..40, m in 0usize..40) {
            let table = KernelTable::new(t, 90).unwrap();
            prop_assert_eq!(table.dirichlet(&[n], &[m]).to_bits(), table.halfline(n, m).to_bits());
            prop_assert_eq!(kernel_nd(t, &[n], &[m]).unwrap().to_bits(), kernel_halfline(t, n, m).unwrap().to_bits());
        }

        #[test]
        fn dirichlet_kernels_are_nonnegative_and_dominated(
            t in 0.05f64..10.0,
            n in proptest::collection::vec(0usize..15, 1..4),
            shift in proptest::collection::vec(0usize..15, 3),
        ) {
            let m: Vec<usize> = shift[..n.len()].to_vec();
            let table = KernelTable::new(t, 40).unwrap();
            let v = table.dirichlet(&n, &m);
            prop_assert!(v >= -1e-14);
            prop_assert!(v <= table.product(&n, &m) + 1e-15);
        }
    }
}
