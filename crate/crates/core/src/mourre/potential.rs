use crate::error::{geometry, Result};
use crate::lattice::{japanese, CMat, LatticeBox, OperatorMatrix, WeightVector};
use nalgebra::DMatrix;

/// Largest growth of the `H1` constant, from half the box to the whole box,
/// that still counts as bounded.
pub const H1_GROWTH: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialFamily {
    Zero,
    /// `amplitude <n>^(-power)` with `<n> = (1 + |n|_2^2)^(1/2)`.
    InverseBracket { amplitude: f64, power: f64 },
    /// `amplitude (-1)^(n_1)`.
    Alternating { amplitude: f64 },
    /// `strength` at the corner site, zero elsewhere.
    CornerWell { strength: f64 },
}

impl PotentialFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::InverseBracket { .. } => "inverse-bracket",
            Self::Alternating { .. } => "alternating",
            Self::CornerWell { .. } => "corner-well",
        }
    }

    fn value(&self, coords: &[i64]) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::InverseBracket { amplitude, power } => {
                let r2: f64 = coords.iter().map(|&c| (c * c) as f64).sum();
                amplitude * japanese(r2.sqrt()).powf(-power)
            }
            Self::Alternating { amplitude } => {
                if coords[0].rem_euclid(2) == 0 {
                    amplitude
                } else {
                    -amplitude
                }
            }
            Self::CornerWell { strength } => {
                if coords.iter().all(|&c| c == 0) {
                    strength
                } else {
                    0.0
                }
            }
        }
    }
}

/// Real potential sampled on the sites of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    lattice: LatticeBox,
    values: Vec<f64>,
    name: String,
}

fn coords(lattice: &LatticeBox, site: usize) -> Vec<i64> {
    (0..lattice.dims()).map(|a| lattice.coordinate(site, a)).collect()
}

impl PotentialGrid {
    pub fn new(lattice: &LatticeBox, family: PotentialFamily) -> Self {
        let values = (0..lattice.size()).map(|s| family.value(&coords(lattice, s))).collect();
        Self {
            lattice: lattice.clone(),
            values,
            name: family.name().to_string(),
        }
    }

    pub fn from_values(lattice: &LatticeBox, values: Vec<f64>, name: &str) -> Result<Self> {
        if values.len() != lattice.size() {
            return geometry(format!("{} potential values for {} sites", values.len(), lattice.size()));
        }
        Ok(Self {
            lattice: lattice.clone(),
            values,
            name: name.to_string(),
        })
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|v| k * v).collect(),
            name: format!("{k}*{}", self.name),
        }
    }

    /// Multiplication operator.
    pub fn operator(&self) -> OperatorMatrix {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values));
        OperatorMatrix::new(self.lattice.clone(), CMat::real(m), true).expect("diagonal matrices are hermitian")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck {
    /// `(R, max_{|n|_1 >= R} |W(n)|)` for `R = 0..=R_max`.
    pub sup_tail: Vec<(usize, f64)>,
    pub h0: bool,
    /// Smallest admissible `H1` constant over the whole box and over `|n|_1 <= R_max / 2`.
    pub constant: f64,
    pub constant_half: f64,
    pub h1: bool,
}

/// Checks the decay hypothesis `W -> 0` and the difference bound
/// `|W(n + e_j) - W(n)| <= C Lambda(n)^(-eps) <n_j>^(-1)` on a finite box.
///
/// `H0` passes when the shell supremum at `R_max / 2` is zero or strictly below
/// the one at `R_max / 8`. `H1` passes when the constant over the whole box is
/// at most [`H1_GROWTH`] times the constant over the inner half.
pub fn check_potential(grid: &PotentialGrid, epsilon: f64) -> PotentialCheck {
    let lat = grid.lattice();
    let radius: Vec<usize> = (0..lat.size())
        .map(|s| coords(lat, s).iter().map(|c| c.unsigned_abs() as usize).sum())
        .collect();
    let r_max = radius.iter().copied().max().unwrap_or(0);
    let mut shell = vec![0.0f64; r_max + 1];
    for (s, &r) in radius.iter().enumerate() {
        shell[r] = shell[r].max(grid.values[s].abs());
    }
    let mut sup_tail = vec![(0, 0.0); r_max + 1];
    let mut running: f64 = 0.0;
    for r in (0..=r_max).rev() {
        running = running.max(shell[r]);
        sup_tail[r] = (r, running);
    }
    let (far, near) = (sup_tail[r_max / 2].1, sup_tail[r_max / 8].1);
    let h0 = far == 0.0 || far < near;

    let lambda = WeightVector::lambda(lat);
    let mut constant: f64 = 0.0;
    let mut constant_half: f64 = 0.0;
    for s in 0..lat.size() {
        for axis in 0..lat.dims() {
            let Some(next) = lat.neighbor(s, axis, 1) else { continue };
            let x = lat.coordinate(s, axis);
            if lat.coordinate(next, axis) != x + 1 {
                continue;
            }
            let diff = (grid.values[next] - grid.values[s]).abs();
            let ratio = diff * lambda.values()[s].powf(epsilon) * japanese(x as f64);
            constant = constant.max(ratio);
            if radius[s] <= r_max / 2 {
                constant_half = constant_half.max(ratio);
            }
        }
    }
    PotentialCheck {
        sup_tail,
        h0,
        constant,
        constant_half,
        h1: constant <= H1_GROWTH * constant_half,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxKind;

    fn half(len: usize) -> LatticeBox {
        LatticeBox::line(len, BoxKind::Half).unwrap()
    }

    #[test]
    fn zero_potential_passes_with_zero_constant() {
        let check = check_potential(&PotentialGrid::new(&half(200), PotentialFamily::Zero), 1.0);
        assert!(check.h0 && check.h1);
        assert_eq!(check.constant, 0.0);
    }

    #[test]
    fn inverse_bracket_passes_up_to_unit_epsilon() {
        let fam = PotentialFamily::InverseBracket { amplitude: 1.0, power: 1.0 };
        for lat in [half(400), LatticeBox::new(&[30, 30], BoxKind::Half).unwrap()] {
            let grid = PotentialGrid::new(&lat, fam);
            for eps in [0.5, 1.0] {
                let check = check_potential(&grid, eps);
                assert!(check.h0, "{lat}");
                assert!(check.h1 && check.constant.is_finite(), "{lat} eps={eps}: {check:?}");
            }
        }
    }

    #[test]
    fn alternating_sign_fails_the_difference_bound() {
        let grid = PotentialGrid::new(&half(200), PotentialFamily::Alternating { amplitude: 1.0 });
        let check = check_potential(&grid, 0.5);
        assert!(!check.h1);
        assert!(!check.h0);
    }

    #[test]
    fn corner_well_is_a_rank_one_diagonal() {
        let grid = PotentialGrid::new(&half(10), PotentialFamily::CornerWell { strength: -2.0 });
        let op = grid.operator();
        assert_eq!(op.get(0, 0).re, -2.0);
        assert_eq!(op.max_abs(), 2.0);
        assert_eq!(grid.scaled(0.01).values()[0], -0.02);
        assert!(check_potential(&grid, 1.0).h0);
    }
}
