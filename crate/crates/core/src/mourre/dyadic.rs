use super::window::smooth_cutoff;
use crate::lattice::linalg::op_norm;
use crate::lattice::{OperatorMatrix, WeightVector};

/// `rho(x) = chi(x) - chi(2x)`, supported in `(1/2, 2)`.
pub fn dyadic_bump(x: f64) -> f64 {
    smooth_cutoff(x) - smooth_cutoff(2.0 * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicReport {
    /// `||rho_k(Lambda) T rho_k(Lambda)||` for `k = 0, 1, ...` up to the box scale.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub total: f64,
}

/// Dyadic sum `sum_k ||rho(Lambda / 2^k) T rho(Lambda / 2^k)||`.
pub fn dyadic_c01_diagnostic(t: &OperatorMatrix, lambda: &WeightVector) -> DyadicReport {
    let top = lambda.values().iter().copied().fold(1.0f64, f64::max);
    let k_max = top.log2().ceil() as usize + 1;
    let mut terms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let scale = 2f64.powi(k as i32);
        let rho: Vec<f64> = lambda.values().iter().map(|&l| dyadic_bump(l / scale)).collect();
        let support: Vec<usize> = (0..rho.len()).filter(|&i| rho[i] != 0.0).collect();
        if support.is_empty() {
            terms.push(0.0);
            continue;
        }
        let weights: Vec<f64> = support.iter().map(|&i| rho[i]).collect();
        let block = t.entries().select(&support, &support).scale_rows_cols(&weights, &weights);
        terms.push(op_norm(&block));
    }
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &v in &terms {
        acc += v;
        partial_sums.push(acc);
    }
    DyadicReport {
        total: acc,
        terms,
        partial_sums,
    }
}

/// Whether dyadic totals over a growing ladder look Cauchy: the last increment
/// is at most half the previous one, or negligible.
pub fn dyadic_ladder_converges(totals: &[f64]) -> bool {
    if totals.len() < 3 {
        return false;
    }
    let n = totals.len();
    let last = (totals[n - 1] - totals[n - 2]).abs();
    let prev = (totals[n - 2] - totals[n - 3]).abs();
    last <= 1e-12 * totals[n - 1].abs().max(1.0) || last <= 0.5 * prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoxKind, LatticeBox};
    use crate::mourre::{build_conjugate, form_commutator, Flavor, PotentialFamily, PotentialGrid};

    #[test]
    fn bump_partitions_unity() {
        for &x in &[1.0, 1.7, 3.3, 50.0, 200.0] {
            let s: f64 = (0..12).map(|k| dyadic_bump(x / 2f64.powi(k))).sum();
            assert!((s - 1.0).abs() < 1e-14, "x={x}");
        }
        assert_eq!(dyadic_bump(0.4), 0.0);
        assert_eq!(dyadic_bump(2.1), 0.0);
    }

    #[test]
    fn zero_operator_gives_zero() {
        let lat = LatticeBox::line(64, BoxKind::Half).unwrap();
        let report = dyadic_c01_diagnostic(&OperatorMatrix::zeros(&lat), &WeightVector::lambda(&lat));
        assert_eq!(report.total, 0.0);
    }

    #[test]
    fn decaying_commutator_converges_and_identity_does_not() {
        let mut decaying = Vec::new();
        let mut identity = Vec::new();
        for len in [64, 128, 256, 512] {
            let lat = LatticeBox::line(len, BoxKind::Half).unwrap();
            let lambda = WeightVector::lambda(&lat);
            let w = PotentialGrid::new(&lat, PotentialFamily::InverseBracket { amplitude: 1.0, power: 1.5 });
            let a = build_conjugate(&lat, &[1.0], Flavor::HalfLattice).unwrap();
            let t = form_commutator(&w.operator(), a.op(), 1).unwrap();
            decaying.push(dyadic_c01_diagnostic(&t, &lambda).total);
            identity.push(dyadic_c01_diagnostic(&OperatorMatrix::identity(&lat), &lambda).total);
        }
        assert!(dyadic_ladder_converges(&decaying), "{decaying:?}");
        assert!(!dyadic_ladder_converges(&identity), "{identity:?}");
    }
}
