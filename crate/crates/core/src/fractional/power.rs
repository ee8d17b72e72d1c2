use crate::error::{geometry, LabError, Result};
use crate::lattice::{
    laplacian, power_of, signed_rep, BoxKind, EigenSystem, LatticeBox, OperatorMatrix, PowerFloor,
};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// How `Delta^r` is evaluated on a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMethod {
    /// Discrete Fourier symbol on a periodic box.
    Circulant,
    /// Eigendecomposition of the box Laplacian.
    Spectral,
    /// Half-line section of the operator on `N` built from a ring kernel by the
    /// reflection `T(n - m) - T(n + m + 2)`; free of far-edge truncation.
    Reflection,
}

impl std::str::FromStr for PowerMethod {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant" => Ok(Self::Circulant),
            "spectral" => Ok(Self::Spectral),
            "reflection" => Ok(Self::Reflection),
            other => Err(LabError::InvalidArgument(format!(
                "unknown method `{other}` (expected circulant|spectral|reflection)"
            ))),
        }
    }
}

/// Ring length used by [`PowerMethod::Reflection`] for a half line of `len` sites.
pub fn reflection_ring(len: usize) -> usize {
    8 * len
}

/// A fractional power together with the number of projected-out modes.
#[derive(Debug, Clone)]
pub struct FracPower {
    pub op: OperatorMatrix,
    pub regularized: usize,
}

/// `f(2 - 2cos theta)` convolution kernel of the ring `Z / len Z`, by displacement.
///
/// Fails with the offending ring eigenvalue when `f` is not finite there.
pub fn ring_kernel(len: usize, f: impl Fn(f64) -> f64) -> std::result::Result<Vec<f64>, f64> {
    let cos = cos_table(len);
    let spectrum: Vec<f64> = (0..len).map(|q| 2.0 - 2.0 * cos[q]).collect();
    let mut weights = Vec::with_capacity(len);
    for &s in &spectrum {
        let v = f(s);
        if !v.is_finite() {
            return Err(s);
        }
        weights.push(v);
    }
    Ok((0..len)
        .map(|k| {
            let sum: f64 = (0..len).map(|q| weights[q] * cos[q * k % len]).sum();
            sum / len as f64
        })
        .collect())
}

/// `cos(2 pi q / len)` with exact symmetry in `q -> len - q`.
fn cos_table(len: usize) -> Vec<f64> {
    (0..len)
        .map(|q| {
            let q = q.min(len - q);
            (2.0 * PI * q as f64 / len as f64).cos()
        })
        .collect()
}

/// Ring kernel of `s^r` with the sub-floor modes dropped.
fn ring_power_kernel(len: usize, r: f64, floor: PowerFloor) -> Result<(Vec<f64>, usize)> {
    let mut dropped = 0;
    let cos = cos_table(len);
    for &c in &cos {
        if r < 0.0 && 2.0 - 2.0 * c < floor.floor {
            if !floor.regularize {
                return Err(LabError::SpectralSingularity { eigenvalue: 2.0 - 2.0 * c });
            }
            dropped += 1;
        }
    }
    let kernel = ring_kernel(len, |s| power_or_zero(s, r, floor.floor))
        .map_err(|eigenvalue| LabError::SpectralSingularity { eigenvalue })?;
    Ok((kernel, dropped))
}

fn power_or_zero(s: f64, r: f64, floor: f64) -> f64 {
    if s <= 0.0 || (r < 0.0 && s < floor) {
        0.0
    } else {
        s.powf(r)
    }
}

/// Circulant matrix on a periodic box with the given multiplier of the full
/// symbol `sum_j (2 - 2cos theta_j)`.
pub fn circulant_function(
    lattice: &LatticeBox,
    f: impl Fn(f64) -> f64,
) -> Result<OperatorMatrix> {
    if lattice.kind() != BoxKind::Periodic {
        return geometry(format!("circulant evaluation needs a periodic box, got {lattice}"));
    }
    let n = lattice.size();
    let dims = lattice.dims();
    let tables: Vec<Vec<f64>> = lattice.extents().iter().map(|&l| cos_table(l)).collect();
    let mut weights = Vec::with_capacity(n);
    for q in 0..n {
        let s: f64 = (0..dims)
            .map(|j| 2.0 - 2.0 * tables[j][(q / lattice.stride(j)) % lattice.extent(j)])
            .sum();
        let v = f(s);
        if !v.is_finite() {
            return Err(LabError::SpectralSingularity { eigenvalue: s });
        }
        weights.push(v);
    }
    // Kernel by displacement; the symbol is even in each momentum separately,
    // so the Fourier sum reduces to a product of cosines.
    let kernel: Vec<f64> = (0..n)
        .map(|k| {
            let ks: Vec<usize> = (0..dims).map(|j| (k / lattice.stride(j)) % lattice.extent(j)).collect();
            let sum: f64 = (0..n)
                .map(|q| {
                    let mut c = weights[q];
                    for j in 0..dims {
                        let qj = (q / lattice.stride(j)) % lattice.extent(j);
                        c *= tables[j][qj * ks[j] % lattice.extent(j)];
                    }
                    c
                })
                .sum();
            sum / n as f64
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |a, b| {
        let mut disp = 0;
        for j in 0..dims {
            let l = lattice.extent(j);
            let (x, y) = ((a / lattice.stride(j)) % l, (b / lattice.stride(j)) % l);
            disp += ((x + l - y) % l) * lattice.stride(j);
        }
        kernel[disp]
    });
    OperatorMatrix::real_symmetric(lattice.clone(), m)
}

/// `Delta^r` on the box.
pub fn frac_power(lattice: &LatticeBox, r: f64, method: PowerMethod, floor: PowerFloor) -> Result<FracPower> {
    if r == 0.0 || !r.is_finite() {
        return Err(LabError::InvalidArgument(format!("exponent must be finite and nonzero, got {r}")));
    }
    match method {
        PowerMethod::Spectral => {
            let eig = EigenSystem::new(&laplacian(lattice))?;
            let (op, regularized) = power_of(&eig, r, floor)?;
            Ok(FracPower { op, regularized })
        }
        PowerMethod::Circulant => {
            let n = lattice.size();
            let mut regularized = 0;
            if r < 0.0 {
                // The only sub-floor mode of a ring Laplacian is the constant one.
                regularized = 1;
                if !floor.regularize {
                    return Err(LabError::SpectralSingularity { eigenvalue: 0.0 });
                }
            }
            let op = circulant_function(lattice, |s| power_or_zero(s, r, floor.floor))?;
            debug_assert_eq!(op.dim(), n);
            Ok(FracPower { op, regularized })
        }
        PowerMethod::Reflection => {
            if lattice.dims() != 1 || lattice.kind() != BoxKind::Half {
                return geometry(format!("reflection sections need a one-dimensional half box, got {lattice}"));
            }
            let len = lattice.size();
            let ring = reflection_ring(len);
            let (t, regularized) = ring_power_kernel(ring, r, floor)?;
            let at = |d: i64| t[d.rem_euclid(ring as i64) as usize];
            let m = DMatrix::from_fn(len, len, |a, b| at(a as i64 - b as i64) - at((a + b + 2) as i64));
            Ok(FracPower {
                op: OperatorMatrix::real_symmetric(lattice.clone(), m)?,
                regularized,
            })
        }
    }
}

/// Kernel `T(k)` of `Delta_Z^r` on a ring, indexed by signed displacement.
#[derive(Debug, Clone)]
pub struct RingKernel {
    values: Vec<f64>,
}

impl RingKernel {
    pub fn power(len: usize, r: f64) -> Result<Self> {
        let (values, _) = ring_power_kernel(len, r, PowerFloor::default())?;
        Ok(Self { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = ring_kernel(len, f).map_err(|eigenvalue| LabError::SpectralSingularity { eigenvalue })?;
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, k: i64) -> f64 {
        self.values[k.rem_euclid(self.values.len() as i64) as usize]
    }

    /// `(signed displacement, value)` pairs in ring order.
    pub fn signed(&self) -> Vec<(i64, f64)> {
        let l = self.values.len();
        (0..l).map(|k| (signed_rep(k, l), self.values[k])).collect()
    }
}

/// Kronecker sum `sum_j I x A_j x I` of one-dimensional operators.
pub fn kronecker_sum(lattice: &LatticeBox, parts: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    if parts.len() != lattice.dims() {
        return geometry(format!("{} axis operators for a {}-dimensional box", parts.len(), lattice.dims()));
    }
    for (j, p) in parts.iter().enumerate() {
        if p.nrows() != lattice.extent(j) || p.ncols() != lattice.extent(j) {
            return geometry(format!(
                "axis {j} operator is {}x{}, extent is {}",
                p.nrows(),
                p.ncols(),
                lattice.extent(j)
            ));
        }
    }
    let n = lattice.size();
    let mut m = DMatrix::zeros(n, n);
    for (j, p) in parts.iter().enumerate() {
        let stride = lattice.stride(j);
        let l = lattice.extent(j);
        for a in 0..n {
            let x = (a / stride) % l;
            let base = a - x * stride;
            for y in 0..l {
                m[(a, base + y * stride)] += p[(x, y)];
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(l: usize) -> LatticeBox {
        LatticeBox::line(l, BoxKind::Periodic).unwrap()
    }

    #[test]
    fn first_power_is_the_laplacian() {
        for lat in [ring(16), LatticeBox::line(16, BoxKind::Half).unwrap()] {
            let methods: &[PowerMethod] = if lat.kind() == BoxKind::Periodic {
                &[PowerMethod::Circulant, PowerMethod::Spectral]
            } else {
                &[PowerMethod::Spectral]
            };
            for &m in methods {
                let p = frac_power(&lat, 1.0, m, PowerFloor::default()).unwrap();
                assert!(p.op.max_abs_diff(&laplacian(&lat)) < 1e-12, "{m:?}");
            }
        }
    }

    #[test]
    fn circulant_square() {
        let lat = ring(32);
        let p = frac_power(&lat, 2.0, PowerMethod::Circulant, PowerFloor::default()).unwrap();
        let d = laplacian(&lat);
        assert!(p.op.max_abs_diff(&d.try_mul(&d).unwrap()) < 1e-10);
    }

    #[test]
    fn circulant_half_power_spectrum() {
        let lat = ring(256);
        let p = frac_power(&lat, 0.5, PowerMethod::Circulant, PowerFloor::default()).unwrap();
        let eig = EigenSystem::new(&p.op).unwrap();
        let mut oracle: Vec<f64> = (0..256)
            .map(|m| (2.0 - 2.0 * (2.0 * PI * m as f64 / 256.0).cos()).max(0.0).sqrt())
            .collect();
        oracle.sort_by(f64::total_cmp);
        for (a, b) in eig.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_circulant_matches_spectral() {
        let lat = LatticeBox::new(&[6, 8], BoxKind::Periodic).unwrap();
        let c = frac_power(&lat, 0.7, PowerMethod::Circulant, PowerFloor::default()).unwrap();
        let s = frac_power(&lat, 0.7, PowerMethod::Spectral, PowerFloor::default()).unwrap();
        assert!(c.op.max_abs_diff(&s.op) < 1e-11);
    }

    #[test]
    fn spectrum_within_symbol_range() {
        let lat = LatticeBox::line(64, BoxKind::Half).unwrap();
        for r in [0.3, 0.5, 1.5, 2.0] {
            let p = frac_power(&lat, r, PowerMethod::Spectral, PowerFloor::default()).unwrap();
            let eig = EigenSystem::new(&p.op).unwrap();
            assert!(eig.values()[0] >= -1e-9);
            assert!(*eig.values().last().unwrap() <= 4f64.powf(r) + 1e-9);
        }
    }

    #[test]
    fn negative_power_on_ring_is_regularized() {
        let lat = ring(16);
        let c = frac_power(&lat, -0.5, PowerMethod::Circulant, PowerFloor::default()).unwrap();
        let s = frac_power(&lat, -0.5, PowerMethod::Spectral, PowerFloor::default()).unwrap();
        assert_eq!(c.regularized, 1);
        assert_eq!(s.regularized, 1);
        assert!(c.op.max_abs_diff(&s.op) < 1e-10);
        let strict = PowerFloor { floor: 1e-8, regularize: false };
        assert!(frac_power(&lat, -0.5, PowerMethod::Circulant, strict).is_err());
    }

    #[test]
    fn reflection_section_is_exact_for_polynomials() {
        // Delta_N^2 on the infinite half line, restricted: pentadiagonal with a
        // corner entry 5 instead of 6.
        let lat = LatticeBox::line(12, BoxKind::Half).unwrap();
        let p = frac_power(&lat, 2.0, PowerMethod::Reflection, PowerFloor::default()).unwrap();
        assert!((p.op.re()[(0, 0)] - 5.0).abs() < 1e-12);
        assert!((p.op.re()[(5, 5)] - 6.0).abs() < 1e-12);
        assert!((p.op.re()[(11, 11)] - 6.0).abs() < 1e-12);
        assert!((p.op.re()[(3, 4)] + 4.0).abs() < 1e-12);
        assert!((p.op.re()[(3, 5)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kronecker_sum_of_tridiagonals() {
        let lat = LatticeBox::new(&[4, 5], BoxKind::Half).unwrap();
        let parts: Vec<DMatrix<f64>> = (0..2)
            .map(|j| laplacian(&LatticeBox::line(lat.extent(j), BoxKind::Half).unwrap()).re().clone())
            .collect();
        let k = kronecker_sum(&lat, &parts).unwrap();
        assert_eq!(&k, laplacian(&lat).re());
    }
}
