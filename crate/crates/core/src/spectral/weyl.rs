use crate::error::Result;
use crate::fractional::{frac_power, reflection_ring, PowerMethod, RingKernel};
use crate::lattice::linalg::{numerical_rank, singular_values};
use crate::lattice::{BoxKind, CMat, EigenSystem, LatticeBox, OperatorMatrix, PowerFloor};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative singular-value tolerance for numerical ranks.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WeylRung {
    pub size: usize,
    /// Kolmogorov-Smirnov distance of the normalized counting functions on the window.
    pub ks_distance: f64,
    pub resolvent_difference: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `[min, max]` spectrum of the half-lattice section and of the compressed one.
    pub half_range: (f64, f64),
    pub compressed_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub rungs: Vec<WeylRung>,
}

impl WeylReport {
    pub fn ks_decreasing(&self) -> bool {
        self.rungs.windows(2).all(|w| w[1].ks_distance <= w[0].ks_distance)
    }
}

/// `sup_x |F(x) - G(x)|` for the normalized counting functions of two samples.
pub fn ks_distance(x: &[f64], y: &[f64]) -> f64 {
    if x.is_empty() || y.is_empty() {
        return if x.is_empty() && y.is_empty() { 0.0 } else { 1.0 };
    }
    let mut points: Vec<f64> = x.iter().chain(y).copied().collect();
    points.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], p: f64| s.iter().filter(|&&v| v <= p).count() as f64 / s.len() as f64;
    points.iter().map(|&p| (cdf(x, p) - cdf(y, p)).abs()).fold(0.0, f64::max)
}

/// `(H - i)^-1`.
pub fn resolvent_at_i(eig: &EigenSystem) -> CMat {
    let d: Vec<Complex64> = eig.values().iter().map(|&l| 1.0 / Complex64::new(l, -1.0)).collect();
    eig.synthesize(&d)
}

/// `R_+ Delta_Z^r J_+` on a one-dimensional half box, from a ring eight times longer.
pub fn compressed_power(lattice: &LatticeBox, r: f64) -> Result<OperatorMatrix> {
    let len = lattice.size();
    let t = RingKernel::power(reflection_ring(len), r)?;
    let m = DMatrix::from_fn(len, len, |a, b| t.at(a as i64 - b as i64));
    OperatorMatrix::real_symmetric(lattice.clone(), m)
}

fn range(values: &[f64]) -> (f64, f64) {
    (values[0], values[values.len() - 1])
}

/// Compares `Delta_N^r` with `R_+ Delta_Z^r J_+` on each rung of a ladder.
pub fn weyl_compare(r: f64, ladder: &[usize], a: f64, b: f64) -> Result<WeylReport> {
    let mut rungs = Vec::with_capacity(ladder.len());
    for &len in ladder {
        let lat = LatticeBox::line(len, BoxKind::Half)?;
        let half = frac_power(&lat, r, PowerMethod::Reflection, PowerFloor::default())?.op;
        let compressed = compressed_power(&lat, r)?;
        let (e1, e2) = (EigenSystem::new(&half)?, EigenSystem::new(&compressed)?);
        let inside = |e: &EigenSystem| -> Vec<f64> { e.values().iter().copied().filter(|&v| v >= a && v <= b).collect() };
        let diff = &resolvent_at_i(&e1) - &resolvent_at_i(&e2);
        let sv = singular_values(&diff);
        let top = sv.first().copied().unwrap_or(0.0);
        rungs.push(WeylRung {
            size: len,
            ks_distance: ks_distance(&inside(&e1), &inside(&e2)),
            resolvent_difference: top,
            rank: numerical_rank(&sv, RANK_TOL * top.max(1.0)),
            singular_values: sv.into_iter().take(10).collect(),
            half_range: range(e1.values()),
            compressed_range: range(e2.values()),
        });
    }
    Ok(WeylReport { r, a, b, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_identical_samples_is_zero() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0], &[2.0]), 1.0);
    }

    #[test]
    fn squared_laplacian_differs_by_rank_one() {
        let report = weyl_compare(2.0, &[32, 64], 1.0, 10.0).unwrap();
        for rung in &report.rungs {
            assert!(rung.rank <= 1, "rank {}", rung.rank);
            for range in [rung.half_range, rung.compressed_range] {
                assert!(range.0 > -1e-10 && range.1 < 16.0 + 1e-10);
            }
        }
    }

    #[test]
    fn square_root_counting_functions_approach() {
        let report = weyl_compare(0.5, &[64, 128, 256], 0.5, 1.3).unwrap();
        assert!(report.ks_decreasing(), "{:?}", report.rungs.iter().map(|r| r.ks_distance).collect::<Vec<_>>());
        for rung in &report.rungs {
            assert!(rung.half_range.0 > -1e-8 && rung.half_range.1 < 2.0 + 1e-8);
        }
    }
}
