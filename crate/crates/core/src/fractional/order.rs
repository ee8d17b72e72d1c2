use crate::error::{invalid, LabError, Result};
use std::f64::consts::PI;

/// Per-axis fractional exponents, none of them zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FracOrder {
    exponents: Vec<f64>,
}

impl FracOrder {
    pub fn new(exponents: &[f64]) -> Result<Self> {
        if exponents.is_empty() {
            return invalid("fractional order needs at least one component");
        }
        if let Some(j) = exponents.iter().position(|r| *r == 0.0 || !r.is_finite()) {
            return invalid(format!("component {j} of the order is {} (must be finite and nonzero)", exponents[j]));
        }
        Ok(Self {
            exponents: exponents.to_vec(),
        })
    }

    pub fn scalar(r: f64) -> Result<Self> {
        Self::new(&[r])
    }

    pub fn dims(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Axes with a positive exponent.
    pub fn positive(&self) -> Vec<usize> {
        (0..self.dims()).filter(|&j| self.exponents[j] > 0.0).collect()
    }

    /// Axes with a negative exponent.
    pub fn negative(&self) -> Vec<usize> {
        (0..self.dims()).filter(|&j| self.exponents[j] < 0.0).collect()
    }

    pub fn signs(&self) -> Vec<f64> {
        self.exponents.iter().map(|r| r.signum()).collect()
    }

    /// Top of the symbol range: finite only when every exponent is positive.
    pub fn lambda_max(&self) -> f64 {
        if self.negative().is_empty() {
            self.exponents.iter().map(|&r| 4f64.powf(r)).sum()
        } else {
            f64::INFINITY
        }
    }

    /// Bottom of the symbol range. Folds from `+0.0`: an empty `f64` sum is `-0.0`.
    pub fn lambda_min(&self) -> f64 {
        self.negative().iter().fold(0.0, |acc, &j| acc + 4f64.powf(self.exponents[j]))
    }
}

/// `(2 - 2 cos k)^r` for one axis. At `k = 0` a negative power is `+inf`
/// when `sentinel` is set and a domain error otherwise.
pub fn axis_symbol(r: f64, k: f64, sentinel: bool) -> Result<f64> {
    let base = 4.0 * (0.5 * k).sin().powi(2);
    if base == 0.0 {
        if r > 0.0 {
            return Ok(0.0);
        }
        return if sentinel {
            Ok(f64::INFINITY)
        } else {
            Err(LabError::Domain(format!("negative power {r} of the symbol at k = {k}")))
        };
    }
    Ok(base.powf(r))
}

/// `h_r(k) = sum_j (2 - 2 cos k_j)^(r_j)`.
pub fn symbol(order: &FracOrder, k: &[f64], sentinel: bool) -> Result<f64> {
    if k.len() != order.dims() {
        return invalid(format!("momentum has {} components, order has {}", k.len(), order.dims()));
    }
    if let Some(bad) = k.iter().find(|x| !(-PI..=PI).contains(*x)) {
        return Err(LabError::Domain(format!("momentum component {bad} outside [-pi, pi]")));
    }
    order
        .exponents()
        .iter()
        .zip(k)
        .map(|(&r, &kj)| axis_symbol(r, kj, sentinel))
        .sum()
}

/// Symbol values on a tensor grid, last axis fastest, plus both range maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub values: Vec<f64>,
    /// Largest value on the grid.
    pub grid_max: f64,
    /// Closed-form supremum over the torus.
    pub lambda_max: f64,
}

pub fn symbol_grid(order: &FracOrder, axes: &[Vec<f64>], sentinel: bool) -> Result<SymbolGrid> {
    if axes.len() != order.dims() {
        return invalid(format!("{} grid axes for a {}-component order", axes.len(), order.dims()));
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let mut values = Vec::with_capacity(total);
    let mut k = vec![0.0; axes.len()];
    for flat in 0..total {
        let mut rest = flat;
        for j in (0..axes.len()).rev() {
            k[j] = axes[j][rest % axes[j].len()];
            rest /= axes[j].len();
        }
        values.push(symbol(order, &k, sentinel)?);
    }
    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SymbolGrid {
        values,
        grid_max,
        lambda_max: order.lambda_max(),
    })
}

/// Uniform momentum grid `-pi + 2 pi q / n`, `q = 0..n`.
pub fn torus_grid(n: usize) -> Vec<f64> {
    (0..n).map(|q| -PI + 2.0 * PI * q as f64 / n as f64).collect()
}

/// Critical values of the symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    pub values: Vec<f64>,
    pub lambda_max: f64,
}

impl ThresholdSet {
    /// Distance from `x` to the nearest threshold.
    pub fn distance(&self, x: f64) -> f64 {
        self.values.iter().map(|t| (t - x).abs()).fold(f64::INFINITY, f64::min)
    }

    /// Distance from `[a, b]` to the set; zero when a threshold lies inside.
    pub fn clearance(&self, a: f64, b: f64) -> f64 {
        self.values
            .iter()
            .map(|&t| if t >= a && t <= b { 0.0 } else { (t - a).abs().min((t - b).abs()) })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `sum_{j in N} 4^(r_j) + sum_{j in P} eps_j 4^(r_j)` over `eps in {0,1}^|P|`.
pub fn thresholds(order: &FracOrder) -> ThresholdSet {
    let base = order.lambda_min();
    let pos: Vec<f64> = order.positive().iter().map(|&j| 4f64.powf(order.exponents()[j])).collect();
    let mut values = Vec::with_capacity(1 << pos.len());
    for mask in 0u64..(1u64 << pos.len()) {
        let mut v = base;
        for (j, p) in pos.iter().enumerate() {
            if mask >> j & 1 == 1 {
                v += p;
            }
        }
        values.push(v);
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    ThresholdSet {
        values,
        lambda_max: order.lambda_max(),
    }
}
