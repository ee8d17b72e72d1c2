use crate::error::{invalid, Result};
use crate::lattice::linalg::op_norm;
use crate::lattice::{EigenSystem, OperatorMatrix, WeightVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest relative change of the plateau value between the top two rungs.
pub const PLATEAU_DRIFT: f64 = 0.1;
/// `eta_min` must exceed this multiple of the local level spacing.
pub const SPACING_FACTOR: f64 = 3.0;
/// Half width of the energy interval used to measure the local level spacing.
const SPACING_HALF_WIDTH: f64 = 0.1;

/// `count` points log-spaced over the decade `[0.1, 1]`.
pub fn eta_decade(count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![0.1];
    }
    (0..count).map(|k| 10f64.powf(-1.0 + k as f64 / (count - 1) as f64)).collect()
}

/// `||<Lambda>^-s (H - lambda - i eta)^-1 <Lambda>^-s||` with `weight = <Lambda>^-s`.
pub fn weighted_resolvent_norm(eig: &EigenSystem, weight: &[f64], lambda: f64, eta: f64) -> f64 {
    let d: Vec<Complex64> = eig.values().iter().map(|&l| 1.0 / Complex64::new(l - lambda, -eta)).collect();
    op_norm(&eig.synthesize(&d).scale_rows_cols(weight, weight))
}

/// Mean eigenvalue spacing within `SPACING_HALF_WIDTH` of `lambda`, falling back
/// to the global mean spacing when the interval holds fewer than two levels.
pub fn local_spacing(values: &[f64], lambda: f64) -> f64 {
    let near: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| (v - lambda).abs() <= SPACING_HALF_WIDTH)
        .collect();
    if near.len() >= 2 {
        return (near[near.len() - 1] - near[0]) / (near.len() - 1) as f64;
    }
    let n = values.len();
    if n < 2 {
        return f64::INFINITY;
    }
    (values[n - 1] - values[0]) / (n - 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LapRung {
    pub size: usize,
    /// `norms[i][j] = N(lambdas[i], etas[j])`.
    pub norms: Vec<Vec<f64>>,
    pub spacing: Vec<f64>,
    /// `eta_min` is below `SPACING_FACTOR` local spacings at some `lambda`.
    pub resolution_warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LapProbeResult {
    pub lambdas: Vec<f64>,
    pub etas: Vec<f64>,
    pub s: f64,
    pub rungs: Vec<LapRung>,
    /// Relative change of `max_lambda N(lambda, eta_min)` between the top two rungs.
    pub drift: f64,
    pub plateau: bool,
}

impl LapProbeResult {
    /// `N(lambda, eta_min) / N(lambda, eta_max)` on the last rung.
    pub fn eta_growth(&self, lambda_index: usize) -> f64 {
        let row = &self.rungs[self.rungs.len() - 1].norms[lambda_index];
        let (lo, hi) = self.eta_extremes();
        row[lo] / row[hi]
    }

    fn eta_extremes(&self) -> (usize, usize) {
        let lo = (0..self.etas.len()).min_by(|&a, &b| self.etas[a].total_cmp(&self.etas[b])).unwrap_or(0);
        let hi = (0..self.etas.len()).max_by(|&a, &b| self.etas[a].total_cmp(&self.etas[b])).unwrap_or(0);
        (lo, hi)
    }
}

/// One rung of the probe on a single operator.
pub fn lap_rung(h: &OperatorMatrix, s: f64, lambdas: &[f64], etas: &[f64]) -> Result<LapRung> {
    let eig = EigenSystem::new(h)?;
    let weight = WeightVector::lambda_bracket_pow(h.lattice(), -s);
    let norms: Vec<Vec<f64>> = lambdas
        .par_iter()
        .map(|&l| etas.iter().map(|&e| weighted_resolvent_norm(&eig, weight.values(), l, e)).collect())
        .collect();
    let spacing: Vec<f64> = lambdas.iter().map(|&l| local_spacing(eig.values(), l)).collect();
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let resolution_warning = spacing.iter().any(|&sp| eta_min < SPACING_FACTOR * sp);
    Ok(LapRung {
        size: h.dim(),
        norms,
        spacing,
        resolution_warning,
    })
}

/// Weighted resolvent norms over a ladder of operators, with the plateau verdict.
pub fn lap_probe(ladder: &[OperatorMatrix], s: f64, lambdas: &[f64], etas: &[f64]) -> Result<LapProbeResult> {
    if lambdas.is_empty() || etas.is_empty() || ladder.is_empty() {
        return invalid("LAP probe needs energies, damping values and at least one rung");
    }
    if etas.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return invalid("damping values must lie in (0, 1]");
    }
    let rungs = ladder.iter().map(|h| lap_rung(h, s, lambdas, etas)).collect::<Result<Vec<_>>>()?;
    let mut result = LapProbeResult {
        lambdas: lambdas.to_vec(),
        etas: etas.to_vec(),
        s,
        rungs,
        drift: f64::INFINITY,
        plateau: false,
    };
    if result.rungs.len() >= 2 {
        let (lo, _) = result.eta_extremes();
        let top = |r: &LapRung| r.norms.iter().map(|row| row[lo]).fold(0.0, f64::max);
        let n = result.rungs.len();
        let (prev, last) = (top(&result.rungs[n - 2]), top(&result.rungs[n - 1]));
        result.drift = (last - prev).abs() / prev;
        result.plateau = result.drift < PLATEAU_DRIFT;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{laplacian, BoxKind, LatticeBox};

    fn half(len: usize) -> OperatorMatrix {
        laplacian(&LatticeBox::line(len, BoxKind::Half).unwrap())
    }

    #[test]
    fn decade_grid() {
        let g = eta_decade(5);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_energy_has_a_plateau() {
        let res = lap_probe(&[half(200), half(400)], 1.0, &[2.0], &eta_decade(5)).unwrap();
        assert!(res.plateau, "drift {}", res.drift);
        assert!(res.rungs.iter().all(|r| !r.resolution_warning));
    }

    #[test]
    fn threshold_energy_grows_as_damping_shrinks() {
        let res = lap_probe(&[half(200), half(400)], 1.0, &[0.0], &eta_decade(5)).unwrap();
        assert!(res.eta_growth(0) >= 2.0, "growth {}", res.eta_growth(0));
    }

    #[test]
    fn unweighted_norm_is_inverse_distance() {
        let h = half(60);
        let eig = EigenSystem::new(&h).unwrap();
        let ones = vec![1.0; 60];
        for &eta in &[0.05, 0.3] {
            let n = weighted_resolvent_norm(&eig, &ones, 2.0, eta);
            let dist = eig
                .values()
                .iter()
                .map(|&l| Complex64::new(l - 2.0, -eta).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((n - 1.0 / dist).abs() < 1e-9 * n);
        }
    }

    #[test]
    fn damping_sign_does_not_matter() {
        let h = half(50);
        let eig = EigenSystem::new(&h).unwrap();
        let w = WeightVector::lambda_bracket_pow(h.lattice(), -1.0);
        for &eta in &[0.1, 0.5] {
            let a = weighted_resolvent_norm(&eig, w.values(), 1.5, eta);
            let b = weighted_resolvent_norm(&eig, w.values(), 1.5, -eta);
            assert!((a - b).abs() < 1e-10 * a);
        }
    }
}
