/// Matching tolerance for an eigenvalue to persist between rungs.
pub const PERSISTENCE_TOL: f64 = 1e-4;
/// Minimal gap, in mean level spacings, for an eigenvalue to count as isolated.
pub const ISOLATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRung {
    pub size: usize,
    pub in_window: Vec<f64>,
    pub mean_spacing: f64,
    /// Isolated and persistent: counted outliers.
    pub outliers: Vec<f64>,
    /// Isolated but without a partner on a neighbouring rung.
    pub unconfirmed: Vec<f64>,
}

impl OutlierRung {
    /// `[low, high]` outlier count; `high > low` flags an ambiguous classification.
    pub fn count_range(&self) -> (usize, usize) {
        (self.outliers.len(), self.outliers.len() + self.unconfirmed.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub a: f64,
    pub b: f64,
    pub rungs: Vec<OutlierRung>,
}

impl OutlierReport {
    pub fn counts(&self) -> Vec<usize> {
        self.rungs.iter().map(|r| r.outliers.len()).collect()
    }

    /// Same count on every rung.
    pub fn stable(&self) -> bool {
        let c = self.counts();
        c.windows(2).all(|w| w[0] == w[1])
    }

    pub fn ambiguous(&self) -> bool {
        self.rungs.iter().any(|r| !r.unconfirmed.is_empty())
    }
}

fn has_partner(spectrum: &[f64], x: f64) -> bool {
    spectrum.iter().any(|&y| (x - y).abs() < PERSISTENCE_TOL)
}

/// Classifies eigenvalues in `[a, b]` over a ladder of ascending spectra.
///
/// An eigenvalue is an outlier when its gap to both neighbours exceeds
/// `ISOLATION_FACTOR` mean spacings of its rung and an adjacent rung holds an
/// eigenvalue within `PERSISTENCE_TOL`.
pub fn eig_window_count(spectra: &[(usize, Vec<f64>)], a: f64, b: f64) -> OutlierReport {
    let rungs = spectra
        .iter()
        .enumerate()
        .map(|(i, (size, values))| {
            let n = values.len();
            let mean_spacing = if n >= 2 { (values[n - 1] - values[0]) / (n - 1) as f64 } else { f64::INFINITY };
            let mut in_window = Vec::new();
            let mut outliers = Vec::new();
            let mut unconfirmed = Vec::new();
            for (k, &x) in values.iter().enumerate() {
                if x < a || x > b {
                    continue;
                }
                in_window.push(x);
                let below = if k > 0 { x - values[k - 1] } else { f64::INFINITY };
                let above = if k + 1 < n { values[k + 1] - x } else { f64::INFINITY };
                if below.min(above) <= ISOLATION_FACTOR * mean_spacing {
                    continue;
                }
                let neighbours = [i.checked_sub(1), Some(i + 1)];
                let persists = neighbours
                    .iter()
                    .flatten()
                    .filter_map(|&j| spectra.get(j))
                    .any(|(_, other)| has_partner(other, x));
                if persists {
                    outliers.push(x);
                } else {
                    unconfirmed.push(x);
                }
            }
            OutlierRung {
                size: *size,
                in_window,
                mean_spacing,
                outliers,
                unconfirmed,
            }
        })
        .collect();
    OutlierReport { a, b, rungs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{laplacian, BoxKind, EigenSystem, LatticeBox};
    use crate::mourre::{PotentialFamily, PotentialGrid};

    fn spectra(strength: f64) -> Vec<(usize, Vec<f64>)> {
        [100, 200, 400]
            .iter()
            .map(|&len| {
                let lat = LatticeBox::line(len, BoxKind::Half).unwrap();
                let w = PotentialGrid::new(&lat, PotentialFamily::CornerWell { strength });
                let h = laplacian(&lat).try_add(&w.operator()).unwrap();
                (len, EigenSystem::new(&h).unwrap().values().to_vec())
            })
            .collect()
    }

    #[test]
    fn free_operator_has_no_interior_outliers() {
        let s = spectra(0.0);
        for (a, b) in [(0.5, 1.5), (1.0, 3.0), (2.5, 3.5)] {
            let report = eig_window_count(&s, a, b);
            assert!(report.counts().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn corner_well_bound_state_persists() {
        let s = spectra(-2.0);
        let below = eig_window_count(&s, -1.0, -0.1);
        assert_eq!(below.counts(), vec![1, 1, 1]);
        assert!((below.rungs[0].outliers[0] + 0.5).abs() < 1e-12);
        let inside = eig_window_count(&s, 1.0, 3.0);
        assert!(inside.stable());
        let weak = eig_window_count(&spectra(-0.02), -1.0, -0.1);
        assert!(weak.counts()[2] <= below.counts()[2]);
    }
}
