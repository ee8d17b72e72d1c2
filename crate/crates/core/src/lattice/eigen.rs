use super::dense::CMat;
use super::geometry::LatticeBox;
use super::operator::OperatorMatrix;
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Default eigenvalue floor below which negative powers are not applied.
pub const DEFAULT_FLOOR: f64 = 1e-8;

/// Eigenvalues below this multiple of the spectral radius are rounding noise.
pub const ZERO_TOL: f64 = 1e-12;

/// Orthonormal eigenbasis of a hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    lattice: LatticeBox,
    values: Vec<f64>,
    vectors: CMat,
}

impl EigenSystem {
    pub fn new(op: &OperatorMatrix) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(LabError::NotHermitian {
                residual: op.entries().hermitian_residual(),
            });
        }
        let (values, vectors) = if op.is_real() {
            let eig = SymmetricEigen::new(op.re().clone());
            let order = ascending(eig.eigenvalues.as_slice());
            let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let v = &eig.eigenvectors;
            let sorted = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, order[j])]);
            (values, CMat::real(sorted))
        } else {
            let eig = SymmetricEigen::new(op.entries().to_complex());
            let order = ascending(eig.eigenvalues.as_slice());
            let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let v = &eig.eigenvectors;
            let sorted = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, order[j])]);
            (values, CMat::from_complex(&sorted))
        };
        Ok(Self {
            lattice: op.lattice().clone(),
            values,
            vectors,
        })
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of eigenvalues in the closed interval `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&k| self.values[k] >= a && self.values[k] <= b)
            .collect()
    }

    /// The columns with the given indices.
    pub fn basis(&self, idx: &[usize]) -> CMat {
        let rows: Vec<usize> = (0..self.vectors.nrows()).collect();
        self.vectors.select(&rows, idx)
    }

    /// `V diag(d) V^dagger`.
    pub fn synthesize(&self, d: &[Complex64]) -> CMat {
        synthesize(&self.vectors, d)
    }

    /// `V diag(d) V^dagger` for real weights.
    pub fn synthesize_real(&self, d: &[f64]) -> CMat {
        synthesize_real(&self.vectors, d)
    }

    /// Coefficients `V^dagger x`.
    pub fn analyze(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.vectors.adjoint_matvec(x)
    }

    /// Vector `V c`.
    pub fn expand(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.vectors.matvec(c)
    }

    /// Sharp spectral projector onto eigenvalues in `[a, b]`.
    pub fn projector(&self, a: f64, b: f64) -> CMat {
        let d: Vec<f64> = self
            .values
            .iter()
            .map(|&l| if l >= a && l <= b { 1.0 } else { 0.0 })
            .collect();
        self.synthesize_real(&d)
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = &self.vectors.adjoint() * &self.vectors;
        (&g - &CMat::identity(self.len())).max_abs()
    }

    /// `max |V diag(values) V^dagger - M| / max(1, max |M|)`.
    pub fn reconstruction_residual(&self, op: &OperatorMatrix) -> f64 {
        let m = self.synthesize_real(&self.values);
        (&m - op.entries()).max_abs() / op.max_abs().max(1.0)
    }
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

pub(crate) fn synthesize_real(v: &CMat, d: &[f64]) -> CMat {
    let scale = |m: &DMatrix<f64>| {
        let mut s = m.clone();
        for (j, mut col) in s.column_iter_mut().enumerate() {
            col *= d[j];
        }
        s
    };
    match v.im() {
        None => CMat::real(scale(v.re()) * v.re().transpose()),
        Some(vi) => {
            let vr = v.re();
            let (sr, si) = (scale(vr), scale(vi));
            let re = &sr * vr.transpose() + &si * vi.transpose();
            let im = &si * vr.transpose() - &sr * vi.transpose();
            CMat::from_parts(re, Some(im))
        }
    }
}

pub(crate) fn synthesize(v: &CMat, d: &[Complex64]) -> CMat {
    if d.iter().all(|z| z.im == 0.0) {
        let dr: Vec<f64> = d.iter().map(|z| z.re).collect();
        return synthesize_real(v, &dr);
    }
    let dr: Vec<f64> = d.iter().map(|z| z.re).collect();
    let di: Vec<f64> = d.iter().map(|z| z.im).collect();
    let a = synthesize_real(v, &dr);
    let b = synthesize_real(v, &di);
    // V (Dr + i Di) V^dagger = A + i B with A, B hermitian.
    &a + &b.mul_i()
}

/// `f(H)` by spectral calculus. Fails if `f` is not finite at an eigenvalue.
pub fn matrix_function(op: &OperatorMatrix, f: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
    let eig = EigenSystem::new(op)?;
    function_of(&eig, f)
}

/// `f(H)` from a precomputed eigensystem.
pub fn function_of(eig: &EigenSystem, f: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
    let mut d = Vec::with_capacity(eig.len());
    for &l in eig.values() {
        let y = f(l);
        if !y.is_finite() {
            return Err(LabError::SpectralSingularity { eigenvalue: l });
        }
        d.push(y);
    }
    OperatorMatrix::new(eig.lattice().clone(), eig.synthesize_real(&d), true)
}

/// How `power_of` treats eigenvalues below the floor when the exponent is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFloor {
    pub floor: f64,
    /// Project the sub-floor eigenspace out instead of failing.
    pub regularize: bool,
}

impl Default for PowerFloor {
    fn default() -> Self {
        Self {
            floor: DEFAULT_FLOOR,
            regularize: true,
        }
    }
}

/// `H^r` for `H >= 0`, together with the number of eigenvalues projected out.
///
/// Eigenvalues within rounding of zero are clamped to zero. For `r < 0` the
/// eigenvalues below the floor are dropped or reported, per `floor`.
pub fn power_of(eig: &EigenSystem, r: f64, floor: PowerFloor) -> Result<(OperatorMatrix, usize)> {
    let mut dropped = 0;
    let mut d = Vec::with_capacity(eig.len());
    let radius = eig.values().iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let zero = ZERO_TOL * radius.max(1.0);
    for &l in eig.values() {
        if l < -floor.floor.max(1e-10) {
            return Err(LabError::Domain(format!(
                "fractional power of an operator with negative eigenvalue {l:e}"
            )));
        }
        let l = if l <= zero { 0.0 } else { l };
        let y = if r < 0.0 && l < floor.floor {
            if !floor.regularize {
                return Err(LabError::SpectralSingularity { eigenvalue: l });
            }
            dropped += 1;
            0.0
        } else if l == 0.0 {
            0.0
        } else {
            l.powf(r)
        };
        d.push(y);
    }
    let op = OperatorMatrix::new(eig.lattice().clone(), eig.synthesize_real(&d), true)?;
    Ok((op, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{laplacian, BoxKind};
    use proptest::prelude::*;

    fn dirichlet(n: usize) -> OperatorMatrix {
        laplacian(&LatticeBox::line(n, BoxKind::Half).unwrap())
    }

    /// Scaling-and-squaring Taylor exponential, independent of any eigensolver.
    fn expm_taylor(m: &DMatrix<f64>) -> DMatrix<f64> {
        let norm = m.abs().row_sum().max();
        let squarings = (norm.log2().ceil().max(0.0) as i32) + 4;
        let a = m / 2f64.powi(squarings);
        let n = m.nrows();
        let mut term = DMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / k as f64;
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn identity_function_reconstructs() {
        let h = dirichlet(40);
        let out = matrix_function(&h, |x| x).unwrap();
        assert!(out.max_abs_diff(&h) < 1e-10);
    }

    #[test]
    fn square_matches_product() {
        let h = dirichlet(40);
        let sq = matrix_function(&h, |x| x * x).unwrap();
        let prod = h.try_mul(&h).unwrap();
        assert!(sq.max_abs_diff(&prod) < 1e-10);
    }

    #[test]
    fn exponential_matches_taylor_oracle() {
        let h = dirichlet(50);
        let e = matrix_function(&h, |x| (-x).exp()).unwrap();
        let oracle = expm_taylor(&(-h.re()));
        assert!((e.re() - oracle).amax() < 1e-9);
    }

    #[test]
    fn eigensystem_invariants() {
        let h = dirichlet(60);
        let eig = EigenSystem::new(&h).unwrap();
        assert!(eig.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(eig.orthonormality_residual() < 1e-10);
        assert!(eig.reconstruction_residual(&h) < 1e-9);
    }

    #[test]
    fn complex_hermitian_path() {
        let b = LatticeBox::line(4, BoxKind::Half).unwrap();
        let re = DMatrix::from_row_slice(4, 4, &[2., 1., 0., 0., 1., 2., 1., 0., 0., 1., 2., 1., 0., 0., 1., 2.]);
        let im = DMatrix::from_row_slice(4, 4, &[0., 0.5, 0., 0., -0.5, 0., 0.5, 0., 0., -0.5, 0., 0.5, 0., 0., -0.5, 0.]);
        let op = OperatorMatrix::new(b, CMat::from_parts(re, Some(im)), true).unwrap();
        let eig = EigenSystem::new(&op).unwrap();
        assert!(eig.orthonormality_residual() < 1e-12);
        assert!(eig.reconstruction_residual(&op) < 1e-12);
    }

    #[test]
    fn singular_function_names_the_eigenvalue() {
        let b = LatticeBox::line(4, BoxKind::Periodic).unwrap();
        let h = laplacian(&b);
        let err = matrix_function(&h, |x| 1.0 / x.max(0.0)).unwrap_err();
        assert!(matches!(err, LabError::SpectralSingularity { eigenvalue } if eigenvalue.abs() < 1e-12));
    }

    #[test]
    fn negative_power_floor() {
        let h = laplacian(&LatticeBox::line(8, BoxKind::Periodic).unwrap());
        let eig = EigenSystem::new(&h).unwrap();
        let strict = PowerFloor { floor: 1e-8, regularize: false };
        assert!(power_of(&eig, -0.5, strict).is_err());
        let (inv, dropped) = power_of(&eig, -1.0, PowerFloor::default()).unwrap();
        assert_eq!(dropped, 1);
        // The regularized inverse is the Moore-Penrose pseudo-inverse.
        let back = h.try_mul(&inv).unwrap().try_mul(&h).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn polynomial_calculus_is_multiplicative(
            p in prop::collection::vec(-2.0f64..2.0, 4),
            q in prop::collection::vec(-2.0f64..2.0, 4),
        ) {
            let h = dirichlet(24);
            let eig = EigenSystem::new(&h).unwrap();
            let eval = |c: &[f64], x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
            let fp = function_of(&eig, |x| eval(&p, x)).unwrap();
            let fq = function_of(&eig, |x| eval(&q, x)).unwrap();
            let fpq = function_of(&eig, |x| eval(&p, x) * eval(&q, x)).unwrap();
            let prod = fp.try_mul(&fq).unwrap();
            prop_assert!(prod.max_abs_diff(&fpq) < 1e-9 * fpq.max_abs().max(1.0));
        }
    }
}
