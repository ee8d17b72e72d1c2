//! Norms, singular values and ranks of dense matrices.

use super::dense::CMat;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Below this size the operator norm comes from a full SVD.
const SVD_CUTOFF: usize = 96;

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = match m.im() {
        None => m.re().clone().singular_values().iter().copied().collect(),
        Some(_) => m.to_complex().singular_values().iter().copied().collect(),
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `tol`.
pub fn numerical_rank(sv: &[f64], tol: f64) -> usize {
    sv.iter().filter(|&&s| s > tol).count()
}

/// Largest singular value.
///
/// Small matrices use a full SVD. Larger ones run Lanczos on `M^dagger M`
/// with full reorthogonalization from a fixed start vector, so the result is
/// deterministic.
pub fn op_norm(m: &CMat) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    if n.max(m.nrows()) <= SVD_CUTOFF {
        return singular_values(m).first().copied().unwrap_or(0.0);
    }
    let top = lanczos_top(n, |x| m.adjoint_matvec(&m.matvec(x)));
    top.max(0.0).sqrt()
}

/// Largest eigenvalue of a hermitian positive semidefinite map.
fn lanczos_top(n: usize, apply: impl Fn(&[Complex64]) -> Vec<Complex64>) -> f64 {
    let max_steps = n.min(300);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_steps);
    let mut alpha = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
    let mut q: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0), 0.0))
        .collect();
    normalize(&mut q);
    let mut last = f64::NAN;
    let mut stable = 0;
    for step in 0..max_steps {
        let mut w = apply(&q);
        let a = dot(&q, &w).re;
        alpha.push(a);
        basis.push(q.clone());
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let bnorm = norm(&w);
        let top = tridiagonal_top(&alpha, &beta);
        if (top - last).abs() <= 1e-15 * top.abs() {
            stable += 1;
        } else {
            stable = 0;
        }
        last = top;
        if bnorm <= 1e-14 * top.abs().max(1e-300) || stable >= 3 || step + 1 == max_steps {
            return top;
        }
        beta.push(bnorm);
        q = w.iter().map(|z| z / bnorm).collect();
    }
    last
}

fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t).eigenvalues.max()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    for z in a.iter_mut() {
        *z /= n;
    }
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMat) -> f64 {
    m.frobenius()
}
