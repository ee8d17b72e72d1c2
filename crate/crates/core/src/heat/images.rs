//! Difference between the free and Dirichlet heat semigroups on `N^d`, and the
//! Gaussian envelopes that control it.

use super::kernel::{image_kernel, KernelTable};
use crate::error::{geometry, invalid, Result};
use crate::lattice::{BoxKind, LatticeBox, OperatorMatrix};

/// Entries at or below this size carry no usable logarithm.
const FIT_FLOOR: f64 = 1e-280;
/// Tolerated negativity of a kernel difference.
const NEGATIVITY_TOL: f64 = 1e-14;

/// `R_+ e^{-t Delta_Z} J_+ - e^{-t Delta_N}` on the sites of a half box,
/// summed over reflected images so that small entries keep full precision.
pub fn semigroup_difference(t: f64, lattice: &LatticeBox) -> Result<OperatorMatrix> {
    if lattice.kind() != BoxKind::Half {
        return geometry(format!("semigroup difference needs a half box, got {lattice}"));
    }
    image_kernel(lattice, t)
}

fn l1(a: &[i64]) -> i64 {
    a.iter().map(|x| x.abs()).sum()
}

/// Distance from `n` to the boundary faces `{n_j = 0}`.
pub fn boundary_distance(n: &[usize]) -> usize {
    n.iter().copied().min().unwrap_or(0)
}

/// `|n - m|_1^2 + dist(n)^2 + dist(m)^2`.
pub fn images_exponent(n: &[usize], m: &[usize]) -> f64 {
    let diff: Vec<i64> = n.iter().zip(m).map(|(&a, &b)| a as i64 - b as i64).collect();
    let dn = boundary_distance(n) as f64;
    let dm = boundary_distance(m) as f64;
    (l1(&diff) as f64).powi(2) + dn * dn + dm * dm
}

/// `min_{J != empty} |n - R_J m|_1^2 / (|n - m|_1^2 + dist(n)^2 + dist(m)^2)`.
///
/// The ratio is always at least 1/2, since `|n - R_J m|_1` dominates both
/// `|n - m|_1` and `dist(n) + dist(m)`.
pub fn geometric_ratio(n: &[usize], m: &[usize]) -> f64 {
    let d = n.len();
    let rhs = images_exponent(n, m);
    let mut worst = f64::INFINITY;
    for mask in 1u32..(1 << d) {
        let gap: i64 = (0..d)
            .map(|j| {
                if mask >> j & 1 == 1 {
                    n[j] as i64 + m[j] as i64 + 2
                } else {
                    (n[j] as i64 - m[j] as i64).abs()
                }
            })
            .sum();
        worst = worst.min((gap * gap) as f64 / rhs);
    }
    worst
}

/// Whether `|n - R_J m|_1^2 >= constant * (|n - m|_1^2 + dist(n)^2 + dist(m)^2)` for all `J != empty`.
pub fn geometric_inequality_holds(n: &[usize], m: &[usize], constant: f64) -> bool {
    geometric_ratio(n, m) >= constant
}

/// Envelope `y <= prefactor * exp(-rate * x)` fitted to samples `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub prefactor: f64,
    pub rate: f64,
    pub samples: usize,
}

impl GaussianFit {
    pub fn is_valid(&self) -> bool {
        self.rate > 0.0 && self.prefactor.is_finite() && self.prefactor > 0.0
    }
}

/// Least-squares slope of `ln y` against `x`, then the smallest prefactor that
/// makes the envelope hold at every sample.
pub fn fit_envelope(samples: &[(f64, f64)]) -> Result<GaussianFit> {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|(_, y)| *y > FIT_FLOOR).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return invalid("an envelope fit needs two positive samples");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("an envelope fit needs distinct abscissae");
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = -sxy / sxx;
    let log_pref = pts.iter().map(|&(x, ly)| ly + rate * x).fold(f64::NEG_INFINITY, f64::max);
    Ok(GaussianFit {
        prefactor: log_pref.exp(),
        rate,
        samples: pts.len(),
    })
}

/// Fit of `p_t(k) <= C t^{-1/2} exp(-c k^2 / t)` over `|k| <= range`.
pub fn fit_free_gaussian(t: f64, range: usize) -> Result<GaussianFit> {
    let table = KernelTable::new(t, range)?;
    let samples: Vec<(f64, f64)> = (0..=range as i64)
        .map(|k| ((k * k) as f64 / t, table.at(k) * t.sqrt()))
        .collect();
    fit_envelope(&samples)
}

/// One kernel-difference entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagesEntry {
    pub t: f64,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub value: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagesReport {
    pub times: Vec<f64>,
    pub fit: Option<GaussianFit>,
    /// Negative entries, or the slowest-decaying ones when no positive rate fits.
    pub violations: Vec<ImagesEntry>,
    pub holds: bool,
}

/// Fits `|D_t(n,m)| <= C t^{-d/2} exp(-c Q(n,m) / t)` over a time grid, with
/// `Q` the exponent of [`images_exponent`].
pub fn images_bound_check(lattice: &LatticeBox, times: &[f64]) -> Result<ImagesReport> {
    if times.is_empty() {
        return invalid("images check needs at least one time");
    }
    let d = lattice.dims() as i32;
    let sites: Vec<Vec<usize>> = lattice.sites().collect();
    let mut entries = Vec::new();
    for &t in times {
        let diff = semigroup_difference(t, lattice)?;
        for (i, n) in sites.iter().enumerate() {
            for (j, m) in sites.iter().enumerate().skip(i) {
                entries.push(ImagesEntry {
                    t,
                    n: n.clone(),
                    m: m.clone(),
                    value: diff.get(i, j).re,
                    exponent: images_exponent(n, m),
                });
            }
        }
    }
    let samples: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.exponent / e.t, e.value.abs() * e.t.powf(d as f64 / 2.0)))
        .collect();
    let fit = fit_envelope(&samples).ok();
    let mut violations: Vec<ImagesEntry> = entries.iter().filter(|e| e.value < -NEGATIVITY_TOL).cloned().collect();
    let fit_ok = fit.is_some_and(|f| f.is_valid());
    if !fit_ok {
        let mut slow: Vec<&ImagesEntry> = entries.iter().filter(|e| e.value > FIT_FLOOR).collect();
        slow.sort_by(|a, b| (b.exponent / b.t).total_cmp(&(a.exponent / a.t)));
        violations.extend(slow.into_iter().take(10).cloned());
    }
    Ok(ImagesReport {
        times: times.to_vec(),
        fit,
        holds: fit_ok && violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::{dirichlet_kernel, full_kernel};
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_difference_is_the_image_term() {
        let lat = LatticeBox::line(40, BoxKind::Half).unwrap();
        for &t in &[0.25, 1.0, 4.0] {
            let diff = semigroup_difference(t, &lat).unwrap();
            let table = KernelTable::new(t, 100).unwrap();
            for n in 0..40 {
                for m in 0..40 {
                    assert!((diff.get(n, m).re - table.at((n + m + 2) as i64)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn image_sum_agrees_with_kernel_subtraction() {
        let lat = LatticeBox::new(&[8, 8], BoxKind::Half).unwrap();
        for &t in &[0.5, 2.0] {
            let direct = semigroup_difference(t, &lat).unwrap();
            let subtracted = full_kernel(&lat, t).unwrap().try_sub(&dirichlet_kernel(&lat, t).unwrap()).unwrap();
            assert!(direct.max_abs_diff(&subtracted) < 1e-15);
        }
    }

    #[test]
    fn difference_decays_into_the_bulk() {
        let lat = LatticeBox::new(&[12, 12], BoxKind::Half).unwrap();
        let diff = semigroup_difference(1.0, &lat).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let i = lat.index(&[k, k]).unwrap();
            let v = diff.get(i, i).re;
            assert!(v < prev, "k={k}");
            prev = v;
        }
    }

    #[test]
    fn bound_holds_on_a_square() {
        let lat = LatticeBox::new(&[20, 20], BoxKind::Half).unwrap();
        let report = images_bound_check(&lat, &[0.25, 0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(report.holds, "{:?}", report.fit);
        let fit = report.fit.unwrap();
        assert!(fit.rate > 0.0 && fit.prefactor > 0.0);
    }

    #[test]
    fn free_kernel_has_gaussian_envelope() {
        let fit = fit_free_gaussian(1.0, 40).unwrap();
        assert!(fit.is_valid());
        let table = KernelTable::new(1.0, 40).unwrap();
        for k in 0..=40i64 {
            assert!(table.at(k) <= fit.prefactor * (-fit.rate * (k * k) as f64).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn unit_constant_fails_for_a_boundary_pair() {
        // |10 - (-2)|^2 = 144 while 10^2 + 10^2 + 0^2 = 200.
        assert!(!geometric_inequality_holds(&[10], &[0], 1.0));
        assert!((geometric_ratio(&[10], &[0]) - 0.72).abs() < 1e-15);
        assert!(geometric_inequality_holds(&[10], &[0], 0.5));
    }

    proptest! {
        #[test]
        fn half_constant_always_holds(
            n in proptest::collection::vec(0usize..60, 1..4),
            m in proptest::collection::vec(0usize..60, 3),
        ) {
            let m = &m[..n.len()];
            prop_assert!(geometric_inequality_holds(&n, m, 0.5));
        }
    }
}
