use crate::error::{invalid, Result};
use crate::lattice::linalg::op_norm;
use crate::lattice::{laplacian, BoxKind, CMat, EigenSystem, LatticeBox};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Momenta sampled for the symbol bound, on top of the box's own.
const SYMBOL_SAMPLES: usize = 8192;

fn power(l: f64, r: f64) -> f64 {
    if l <= 0.0 {
        if r > 0.0 {
            0.0
        } else {
            // Zero modes of negative powers are projected out.
            f64::NAN
        }
    } else {
        l.powf(r)
    }
}

fn resolvent_weight(l: f64, r: f64) -> Complex64 {
    let h = power(l, r);
    if h.is_nan() {
        return Complex64::new(0.0, 0.0);
    }
    1.0 / Complex64::new(h, -1.0)
}

/// `(Delta^r - i)^-1` on the box of `eig`.
pub fn power_resolvent(eig: &EigenSystem, r: f64) -> CMat {
    let d: Vec<Complex64> = eig.values().iter().map(|&l| resolvent_weight(l, r)).collect();
    eig.synthesize(&d)
}

/// `sup_k |(h_r - i)^-1 - (h_r' - i)^-1|` over a fine momentum grid and the
/// momenta of a ring of `len` sites, with `h_r(k) = (2 - 2 cos k)^r`.
pub fn symbol_resolvent_bound(r: f64, r2: f64, len: usize) -> f64 {
    let fine = (0..=SYMBOL_SAMPLES).map(|j| PI * j as f64 / SYMBOL_SAMPLES as f64);
    let ring = (0..=len / 2).map(|j| 2.0 * PI * j as f64 / len as f64);
    fine.chain(ring)
        .map(|k| {
            let l = 2.0 - 2.0 * k.cos();
            (resolvent_weight(l, r) - resolvent_weight(l, r2)).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RScanRow {
    pub r: f64,
    pub r_next: f64,
    pub difference: f64,
    pub symbol_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RScanReport {
    pub lattice: LatticeBox,
    pub rows: Vec<RScanRow>,
    /// `max difference / |r - r'|` over the path.
    pub modulus: f64,
}

impl RScanReport {
    pub fn max_difference(&self) -> f64 {
        self.rows.iter().map(|r| r.difference).fold(0.0, f64::max)
    }

    /// Every difference within `factor` times its symbol bound.
    pub fn within_symbol_bound(&self, factor: f64) -> bool {
        self.rows.iter().all(|r| r.difference <= factor * r.symbol_bound + 1e-12)
    }
}

/// Resolvent differences of `Delta^r` at `z = i` along a path of exponents.
pub fn r_scan(lattice: &LatticeBox, path: &[f64]) -> Result<RScanReport> {
    if path.len() < 2 {
        return invalid("an exponent path needs at least two points");
    }
    if path.iter().any(|&r| !(r > -1.0) || r == 0.0) {
        return invalid("path exponents must exceed -1 and be nonzero");
    }
    let eig = EigenSystem::new(&laplacian(lattice))?;
    let ring_len = match lattice.kind() {
        BoxKind::Periodic => lattice.extent(0),
        BoxKind::Half => 2 * (lattice.extent(0) + 1),
    };
    let resolvents: Vec<CMat> = path.iter().map(|&r| power_resolvent(&eig, r)).collect();
    let rows: Vec<RScanRow> = path
        .windows(2)
        .zip(resolvents.windows(2))
        .map(|(rs, res)| RScanRow {
            r: rs[0],
            r_next: rs[1],
            difference: op_norm(&(&res[0] - &res[1])),
            symbol_bound: symbol_resolvent_bound(rs[0], rs[1], ring_len),
        })
        .collect();
    let modulus = rows
        .iter()
        .map(|row| row.difference / (row.r_next - row.r).abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(RScanReport {
        lattice: lattice.clone(),
        rows,
        modulus,
    })
}

/// `[start, start + step, ..., end]`.
pub fn exponent_path(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_exponents_give_zero() {
        let lat = LatticeBox::line(40, BoxKind::Periodic).unwrap();
        let eig = EigenSystem::new(&laplacian(&lat)).unwrap();
        let a = power_resolvent(&eig, 0.5);
        let b = power_resolvent(&eig, 0.5);
        assert_eq!(op_norm(&(&a - &b)), 0.0);
        assert_eq!(symbol_resolvent_bound(0.5, 0.5, 40), 0.0);
    }

    #[test]
    fn periodic_path_respects_symbol_bound_and_shrinks() {
        let lat = LatticeBox::line(256, BoxKind::Periodic).unwrap();
        let coarse = r_scan(&lat, &exponent_path(0.4, 0.6, 0.05)).unwrap();
        assert_eq!(coarse.rows.len(), 4);
        assert!(coarse.within_symbol_bound(1.0));
        let fine = r_scan(&lat, &exponent_path(0.4, 0.6, 0.025)).unwrap();
        assert!(fine.max_difference() < 0.6 * coarse.max_difference());
    }

    #[test]
    fn half_line_is_within_twice_the_symbol_bound() {
        let lat = LatticeBox::line(256, BoxKind::Half).unwrap();
        let report = r_scan(&lat, &exponent_path(0.4, 0.6, 0.05)).unwrap();
        assert!(report.within_symbol_bound(2.0));
    }
}
