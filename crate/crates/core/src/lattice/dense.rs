//! Dense complex matrices stored as separate real and imaginary parts.
//!
//! Most operators here are real symmetric (Laplacians, their powers, boundary
//! corrections) or purely imaginary (the conjugate operator). Keeping the two
//! parts apart routes products through nalgebra's blocked `f64` gemm, which is
//! an order of magnitude faster than its generic `Complex64` path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

impl CMat {
    pub fn real(re: DMatrix<f64>) -> Self {
        Self { re, im: None }
    }

    pub fn from_parts(re: DMatrix<f64>, im: Option<DMatrix<f64>>) -> Self {
        if let Some(im) = &im {
            assert_eq!(re.shape(), im.shape(), "real and imaginary parts differ in shape");
        }
        Self { re, im }
    }

    /// Purely imaginary matrix `i * im`.
    pub fn imaginary(im: DMatrix<f64>) -> Self {
        let re = DMatrix::zeros(im.nrows(), im.ncols());
        Self { re, im: Some(im) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::real(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::real(DMatrix::identity(n, n))
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        let re = m.map(|z| z.re);
        let im = m.map(|z| z.im);
        if im.iter().all(|&x| x == 0.0) {
            Self::real(re)
        } else {
            Self::from_parts(re, Some(im))
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.im {
            None => self.re.map(|x| Complex64::new(x, 0.0)),
            Some(im) => self.re.zip_map(im, Complex64::new),
        }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> Option<&DMatrix<f64>> {
        self.im.as_ref()
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        (self.re, self.im)
    }

    /// True when no imaginary part is stored (it may still be stored and zero).
    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    /// Drops an imaginary part whose entries are all below `tol`.
    pub fn prune_imaginary(mut self, tol: f64) -> Self {
        if self.im.as_ref().is_some_and(|im| im.amax() <= tol) {
            self.im = None;
        }
        self
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let im = self.im.as_ref().map_or(0.0, |m| m[(i, j)]);
        Complex64::new(self.re[(i, j)], im)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: self.im.as_ref().map(|m| -m.transpose()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: self.im.as_ref().map(|m| m.transpose()),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            re: &self.re * k,
            im: self.im.as_ref().map(|m| m * k),
        }
    }

    /// Multiplication by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        match &self.im {
            None => Self::imaginary(self.re.clone()),
            Some(im) => Self::from_parts(-im, Some(self.re.clone())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.im {
            None => self.re.amax(),
            Some(im) => self
                .re
                .iter()
                .zip(im.iter())
                .map(|(a, b)| a.hypot(*b))
                .fold(0.0, f64::max),
        }
    }

    pub fn frobenius(&self) -> f64 {
        let re = self.re.norm_squared();
        let im = self.im.as_ref().map_or(0.0, |m| m.norm_squared());
        (re + im).sqrt()
    }

    /// `max |M - M^dagger|` entrywise.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.nrows();
        if n != self.ncols() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in j..n {
                let dr = self.re[(i, j)] - self.re[(j, i)];
                let di = self.im.as_ref().map_or(0.0, |m| m[(i, j)] + m[(j, i)]);
                worst = worst.max(dr.hypot(di));
            }
        }
        worst
    }

    /// Replaces the matrix by `(M + M^dagger) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.nrows();
        for j in 0..n {
            for i in j + 1..n {
                let r = 0.5 * (self.re[(i, j)] + self.re[(j, i)]);
                self.re[(i, j)] = r;
                self.re[(j, i)] = r;
            }
        }
        if let Some(im) = self.im.as_mut() {
            for j in 0..n {
                im[(j, j)] = 0.0;
                for i in j + 1..n {
                    let v = 0.5 * (im[(i, j)] - im[(j, i)]);
                    im[(i, j)] = v;
                    im[(j, i)] = -v;
                }
            }
        }
    }

    /// Submatrix on the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
        Self {
            re: pick(&self.re),
            im: self.im.as_ref().map(pick),
        }
    }

    /// Scales row `i` by `left[i]` and column `j` by `right[j]`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Self {
        let f = |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| left[i] * m[(i, j)] * right[j]);
        Self {
            re: f(&self.re),
            im: self.im.as_ref().map(f),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let xr = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
        let xi = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
        let xi_zero = xi.iter().all(|&v| v == 0.0);
        let (yr, yi) = match (&self.im, xi_zero) {
            (None, true) => (&self.re * &xr, DVector::zeros(self.nrows())),
            (None, false) => (&self.re * &xr, &self.re * &xi),
            (Some(im), true) => (&self.re * &xr, im * &xr),
            (Some(im), false) => (&self.re * &xr - im * &xi, &self.re * &xi + im * &xr),
        };
        yr.iter().zip(yi.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let xr = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
        let xi = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
        let rt = |m: &DMatrix<f64>, v: &DVector<f64>| m.tr_mul(v);
        let (yr, yi) = match &self.im {
            None => (rt(&self.re, &xr), rt(&self.re, &xi)),
            Some(im) => (
                rt(&self.re, &xr) + rt(im, &xi),
                rt(&self.re, &xi) - rt(im, &xr),
            ),
        };
        yr.iter().zip(yi.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        let re = &self.re * &rhs.re;
        match (&self.im, &rhs.im) {
            (None, None) => CMat::real(re),
            (Some(a), None) => CMat::from_parts(re, Some(a * &rhs.re)),
            (None, Some(b)) => CMat::from_parts(re, Some(&self.re * b)),
            (Some(a), Some(b)) => {
                let im = &self.re * b + a * &rhs.re;
                CMat::from_parts(re - a * b, Some(im))
            }
        }
    }
}

fn combine(a: &CMat, b: &CMat, sign: f64) -> CMat {
    assert_eq!(a.re.shape(), b.re.shape(), "shape mismatch");
    let re = &a.re + &b.re * sign;
    let im = match (&a.im, &b.im) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y * sign),
        (Some(x), Some(y)) => Some(x + y * sign),
    };
    CMat::from_parts(re, im)
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        combine(self, rhs, -1.0)
    }
}

impl Neg for &CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: f64, n: usize) -> CMat {
        let re = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64 * seed).sin());
        let im = DMatrix::from_fn(n, n, |i, j| ((i * 5 + j * 11) as f64 * seed).cos());
        CMat::from_parts(re, Some(im))
    }

    #[test]
    fn product_matches_complex_path() {
        let a = sample(0.3, 5);
        let b = sample(0.7, 5);
        let expect = a.to_complex() * b.to_complex();
        let got = (&a * &b).to_complex();
        assert!((expect - got).iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn matvec_and_adjoint_matvec() {
        let a = sample(0.4, 4);
        let x: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let xc = nalgebra::DVector::from_vec(x.clone());
        let y = a.to_complex() * &xc;
        let ya = a.to_complex().adjoint() * &xc;
        for (u, v) in a.matvec(&x).iter().zip(y.iter()) {
            assert!((u - v).norm() < 1e-13);
        }
        for (u, v) in a.adjoint_matvec(&x).iter().zip(ya.iter()) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn symmetrize_removes_antihermitian_part() {
        let mut a = sample(0.9, 6);
        a.symmetrize();
        assert_eq!(a.hermitian_residual(), 0.0);
    }

    #[test]
    fn mul_i_twice_negates() {
        let a = sample(0.2, 3);
        let b = a.mul_i().mul_i();
        assert!((&b + &a).max_abs() < 1e-15);
    }
}
