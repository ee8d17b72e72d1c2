//! The bulk commutator multiplier `w`, defined by `[Delta_Z, iA] = w(Delta_Z)`,
//! measured on periodic boxes and compared with commutators of `Delta^r`.

use super::commutator::{circulant_commutator, form_commutator};
use super::conjugate::{build_conjugate, Flavor};
use super::window::SpectralWindow;
use crate::error::{invalid, LabError, Result};
use crate::fractional::{circulant_function, frac_power, PowerMethod, RingKernel};
use crate::lattice::linalg::{op_norm, singular_values};
use crate::lattice::{function_of, laplacian, BoxKind, CMat, EigenSystem, LatticeBox, PowerFloor};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Highest polynomial degree tried when representing the measured table.
const MAX_DEGREE: usize = 8;
/// Entries below this count as outside the support of a residual.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Samples `(lambda, w(lambda))`, ascending in `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    source: String,
    lambda: Vec<f64>,
    w: Vec<f64>,
    /// `max_k |C e_k - w_k e_k|` over Fourier modes at measurement time.
    diagonal_residual: f64,
}

/// Least-squares polynomial in `lambda`, coefficients from degree zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

impl MultiplierTable {
    /// Measures `w` from `[Delta_Z, iA]` on a periodic ring of `len` sites.
    pub fn measure(len: usize) -> Result<Self> {
        let ring = LatticeBox::line(len, BoxKind::Periodic)?;
        let c = circulant_commutator(&ring, &[RingKernel::power(len, 1.0)?], &[1.0])?;
        let mut lambda = Vec::new();
        let mut w = Vec::new();
        let mut diagonal_residual: f64 = 0.0;
        for k in 0..=len / 2 {
            let theta = 2.0 * PI * k as f64 / len as f64;
            let (re, im): (Vec<f64>, Vec<f64>) = (0..len)
                .map(|n| {
                    let phase = theta * n as f64;
                    (phase.cos(), phase.sin())
                })
                .unzip();
            let norm = 1.0 / (len as f64).sqrt();
            let cre = c.re() * DVector::from_vec(re.clone());
            let cim = c.re() * DVector::from_vec(im.clone());
            // Rayleigh quotient of the unit Fourier mode.
            let value = (0..len).map(|n| re[n] * cre[n] + im[n] * cim[n]).sum::<f64>() * norm * norm;
            for n in 0..len {
                let dr = (cre[n] - value * re[n]) * norm;
                let di = (cim[n] - value * im[n]) * norm;
                diagonal_residual = diagonal_residual.max(dr.hypot(di));
            }
            lambda.push(2.0 - 2.0 * theta.cos());
            w.push(value);
        }
        Ok(Self {
            source: format!("periodic box L={len}"),
            lambda,
            w,
            diagonal_residual,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn diagonal_residual(&self) -> f64 {
        self.diagonal_residual
    }

    /// Linear interpolation, clamped to the tabulated range.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.lambda.len();
        if x <= self.lambda[0] {
            return self.w[0];
        }
        if x >= self.lambda[n - 1] {
            return self.w[n - 1];
        }
        let hi = self.lambda.partition_point(|&l| l < x);
        let (l0, l1) = (self.lambda[hi - 1], self.lambda[hi]);
        let f = if l1 > l0 { (x - l0) / (l1 - l0) } else { 0.0 };
        self.w[hi - 1] + f * (self.w[hi] - self.w[hi - 1])
    }

    /// Lowest-degree polynomial reproducing the table to `1e-12` relative,
    /// or the best one of degree [`MAX_DEGREE`].
    pub fn polynomial(&self) -> Polynomial {
        let scale = self.w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut best = None;
        for degree in 0..=MAX_DEGREE.min(self.lambda.len() - 1) {
            let vander = DMatrix::from_fn(self.lambda.len(), degree + 1, |i, j| self.lambda[i].powi(j as i32));
            let rhs = DVector::from_column_slice(&self.w);
            let Ok(coeffs) = vander.clone().svd(true, true).solve(&rhs, 1e-14) else { continue };
            let coeffs: Vec<f64> = coeffs.iter().copied().collect();
            let poly = Polynomial { coeffs, residual: 0.0 };
            let residual = self
                .lambda
                .iter()
                .zip(&self.w)
                .map(|(&l, &v)| (poly.eval(l) - v).abs())
                .fold(0.0, f64::max);
            let poly = Polynomial { residual, ..poly };
            if residual <= 1e-12 * scale {
                return poly;
            }
            best = Some(poly);
        }
        best.unwrap_or(Polynomial {
            coeffs: vec![0.0],
            residual: f64::INFINITY,
        })
    }

    /// `max |w(lambda) - f(lambda)|` over the table.
    pub fn residual_against(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.lambda.iter().zip(&self.w).map(|(&l, &v)| (v - f(l)).abs()).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# bulk commutator multiplier measured on {}\n# lambda w\n", self.source);
        for (l, v) in self.lambda.iter().zip(&self.w) {
            let _ = writeln!(out, "{l:.16e} {v:.16e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut source = String::from("unknown");
        let mut lambda = Vec::new();
        let mut w = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(src) = comment.trim().strip_prefix("bulk commutator multiplier measured on ") {
                    source = src.to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
            match parsed.as_deref() {
                Some(&[l, v]) => {
                    if lambda.last().is_some_and(|&prev| l < prev) {
                        return invalid(format!("line {}: lambda values must ascend", no + 1));
                    }
                    lambda.push(l);
                    w.push(v);
                }
                _ => return invalid(format!("line {}: expected two numbers, got {line:?}", no + 1)),
            }
        }
        if lambda.len() < 2 {
            return invalid("a multiplier table needs at least two rows");
        }
        Ok(Self {
            source,
            lambda,
            w,
            diagonal_residual: f64::NAN,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| LabError::InvalidArgument(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| LabError::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// `r (r - 1) (4 - x)^2 x^(r-2) + r (4 - 2x) x^(r-1)`, the displayed double-commutator multiplier.
pub fn displayed_double_multiplier(r: f64, x: f64) -> f64 {
    r * (r - 1.0) * (4.0 - x).powi(2) * x.powf(r - 2.0) + r * (4.0 - 2.0 * x) * x.powf(r - 1.0)
}

/// `r x^(r-1) w(x)`, the first-commutator multiplier of `Delta^r`.
pub fn first_multiplier(r: f64, x: f64, w: &Polynomial) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    r * x.powf(r - 1.0) * w.eval(x)
}

/// One rung of a multiplier check.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierRung {
    pub len: usize,
    /// `max |[Delta_Z^r, iA] - r Delta^(r-1) w(Delta)|` on the periodic ring.
    pub periodic_residual: f64,
    /// Collar of the half-line residual, measured on the sites `< 3L/4`.
    pub collar: usize,
    /// Largest residual entry on sites in `[collar, 3L/4)`.
    pub outside_collar: f64,
    /// Leading singular values of the residual restricted to the sites `< L/2`.
    pub singular_values: Vec<f64>,
    /// `||E_I (C_1 - r H^(r-1) w(H)) E_I||` on the whole box and on the sites `< L/2`.
    pub window_first: f64,
    pub window_first_near_face: f64,
    /// `||E_I (C_2 - g(H)) E_I||` for the displayed `g` and for `r H^(r-1) w(H)`.
    pub window_double_displayed: f64,
    pub window_double_first: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    pub r: f64,
    pub source: String,
    pub diagonal_residual: f64,
    pub polynomial: Polynomial,
    /// `max |w - lambda (4 - lambda)|` and `max |w - lambda (4 - lambda) / 2|`.
    pub conjecture_full: f64,
    pub conjecture_half: f64,
    pub rungs: Vec<MultiplierRung>,
}

fn compress(basis: &CMat, m: &CMat) -> CMat {
    let left = basis.adjoint();
    &(&left * m) * basis
}

/// Full-box and near-face norms of `E_I M E_I`.
fn window_norms(eig: &EigenSystem, window: &SpectralWindow, m: &CMat) -> (f64, f64) {
    let idx = eig.window(window.a(), window.b());
    if idx.is_empty() {
        return (0.0, 0.0);
    }
    let basis = eig.basis(&idx);
    let full = op_norm(&compress(&basis, m));
    let half: Vec<usize> = (0..m.nrows() / 2).collect();
    let projected = &(&basis * &compress(&basis, m)) * &basis.adjoint();
    let near = op_norm(&projected.select(&half, &half));
    (full, near)
}

/// Compares commutators of `Delta^r` with the measured multiplier across a ladder
/// of one-dimensional boxes. Window comparisons need clearance at least 1/4.
pub fn multiplier_check(
    r: f64,
    ladder: &[usize],
    table: &MultiplierTable,
    window: &SpectralWindow,
) -> Result<MultiplierReport> {
    if r == 0.0 || !r.is_finite() {
        return invalid(format!("multiplier check needs a finite nonzero order, got {r}"));
    }
    if window.clearance() < 0.25 {
        return invalid(format!("window clearance {} is below 1/4", window.clearance()));
    }
    let poly = table.polynomial();
    let mut rungs = Vec::with_capacity(ladder.len());
    for &len in ladder {
        let ring = LatticeBox::line(len, BoxKind::Periodic)?;
        let c_ring = circulant_commutator(&ring, &[RingKernel::power(len, r)?], &[r.signum()])?;
        let g_ring = circulant_function(&ring, |x| r.signum() * first_multiplier(r, x, &poly))?;
        let periodic_residual = c_ring.max_abs_diff(&g_ring);

        let half = LatticeBox::line(len, BoxKind::Half)?;
        let h = frac_power(&half, r, PowerMethod::Spectral, PowerFloor::default())?.op;
        let a = build_conjugate(&half, &[r.signum()], Flavor::HalfLattice)?.into_op();
        let c1 = form_commutator(&h, &a, 1)?;
        let c2 = form_commutator(&h, &a, 2)?;
        let eig_lap = EigenSystem::new(&laplacian(&half))?;
        let g1 = function_of(&eig_lap, |x| r.signum() * first_multiplier(r, x, &poly))?;
        let residual = c1.try_sub(&g1)?;

        let reach = 3 * len / 4;
        let mut collar = 0;
        for i in 0..reach {
            for j in 0..reach {
                if residual.get(i, j).norm() > SUPPORT_TOL {
                    collar = collar.max(i.min(j) + 1);
                }
            }
        }
        let mut outside: f64 = 0.0;
        for i in collar..reach {
            for j in collar..reach {
                outside = outside.max(residual.get(i, j).norm());
            }
        }
        let near: Vec<usize> = (0..len / 2).collect();
        let mut sv = singular_values(&residual.entries().select(&near, &near));
        sv.truncate(8);

        let eig_h = EigenSystem::new(&h)?;
        // Spectral multipliers of H = Delta^r are written in the variable x = lambda^r.
        let of_h = |f: &dyn Fn(f64) -> f64| function_of(&eig_h, |x| f(x.max(0.0).powf(1.0 / r)));
        let g1_h = of_h(&|l| r.signum() * first_multiplier(r, l, &poly))?;
        let (window_first, window_first_near_face) = window_norms(&eig_h, window, c1.try_sub(&g1_h)?.entries());
        let gd = of_h(&|l| displayed_double_multiplier(r, l.max(1e-300)))?;
        let (window_double_displayed, _) = window_norms(&eig_h, window, c2.try_sub(&gd)?.entries());
        let g1_unsigned = of_h(&|l| first_multiplier(r, l, &poly))?;
        let (window_double_first, _) = window_norms(&eig_h, window, c2.try_sub(&g1_unsigned)?.entries());
        rungs.push(MultiplierRung {
            len,
            periodic_residual,
            collar,
            outside_collar: outside,
            singular_values: sv,
            window_first,
            window_first_near_face,
            window_double_displayed,
            window_double_first,
        });
    }
    Ok(MultiplierReport {
        r,
        source: table.source().to_string(),
        diagonal_residual: table.diagonal_residual(),
        conjecture_full: table.residual_against(|l| l * (4.0 - l)),
        conjecture_half: table.residual_against(|l| 0.5 * l * (4.0 - l)),
        polynomial: poly,
        rungs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{thresholds, FracOrder};

    fn window() -> SpectralWindow {
        SpectralWindow::new(1.0, 3.0, &thresholds(&FracOrder::scalar(1.0).unwrap())).unwrap()
    }

    #[test]
    fn measured_multiplier_is_fourier_diagonal() {
        let table = MultiplierTable::measure(256).unwrap();
        assert!(table.diagonal_residual() < 1e-12);
        assert_eq!(table.lambda().len(), 129);
        // Oracle: the commutator kernel is 1 at 0 and -1/2 at +-2, whose
        // Fourier symbol is 1 - cos(2 theta).
        for (k, (&l, &v)) in table.lambda().iter().zip(table.w()).enumerate() {
            let theta = 2.0 * PI * k as f64 / 256.0;
            assert!((l - (2.0 - 2.0 * theta.cos())).abs() < 1e-14);
            assert!((v - (1.0 - (2.0 * theta).cos())).abs() < 1e-12);
        }
        assert!(table.residual_against(|l| 0.5 * l * (4.0 - l)) < 1e-12);
        assert!(table.residual_against(|l| l * (4.0 - l)) > 1.9);
        let poly = table.polynomial();
        assert_eq!(poly.coeffs.len(), 3);
        assert!(poly.residual < 1e-12);
    }

    #[test]
    fn table_round_trips_through_text() {
        let table = MultiplierTable::measure(32).unwrap();
        let text = table.to_text();
        assert!(text.starts_with("# bulk commutator multiplier measured on periodic box L=32"));
        let back = MultiplierTable::parse(&text).unwrap();
        assert_eq!(back.lambda(), table.lambda());
        assert_eq!(back.w(), table.w());
        assert_eq!(back.source(), "periodic box L=32");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        table.save(&path).unwrap();
        assert_eq!(MultiplierTable::load(&path).unwrap().w(), table.w());
        let err = MultiplierTable::parse("# x\n0 1\n1 oops\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
        assert!((table.interpolate(2.0) - 2.0).abs() < 0.05);
    }

    #[test]
    fn order_one_multiplier_is_w_itself() {
        let table = MultiplierTable::measure(256).unwrap();
        let report = multiplier_check(1.0, &[256], &table, &window()).unwrap();
        let rung = &report.rungs[0];
        assert!(rung.periodic_residual < 1e-10);
        assert!(rung.collar <= 1);
        assert!(rung.outside_collar <= SUPPORT_TOL);
    }

    #[test]
    fn order_two_residual_lives_in_a_thin_collar() {
        let table = MultiplierTable::measure(256).unwrap();
        let report = multiplier_check(2.0, &[64, 128], &table, &window()).unwrap();
        for rung in &report.rungs {
            assert!(rung.periodic_residual < 1e-10);
            assert!(rung.collar <= 4, "collar {}", rung.collar);
            assert!(rung.outside_collar <= SUPPORT_TOL);
        }
    }

    #[test]
    fn narrow_clearance_is_rejected() {
        let table = MultiplierTable::measure(32).unwrap();
        let thr = thresholds(&FracOrder::scalar(1.0).unwrap());
        let tight = SpectralWindow::new(0.1, 3.0, &thr).unwrap();
        assert!(multiplier_check(0.5, &[32], &table, &tight).is_err());
    }
}
