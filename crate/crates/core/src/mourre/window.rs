use crate::error::{invalid, Result};
use crate::fractional::ThresholdSet;

/// Fraction of a window on which the default bump equals one.
pub const DEFAULT_PLATEAU: f64 = 0.5;

/// `C^inf` step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// `C^inf` cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn smooth_cutoff(x: f64) -> f64 {
    1.0 - smooth_step(x.abs() - 1.0)
}

/// Smooth bump on `[a, b]`, equal to one on the central `plateau` fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub a: f64,
    pub b: f64,
    pub plateau: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        let width = self.b - self.a;
        let ramp = 0.5 * (1.0 - self.plateau) * width;
        if ramp <= 0.0 {
            return if x >= self.a && x <= self.b { 1.0 } else { 0.0 };
        }
        smooth_step((x - self.a) / ramp) * smooth_step((self.b - x) / ramp)
    }
}

/// Energy window `[a, b]` with its distance to the thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    a: f64,
    b: f64,
    clearance: f64,
    plateau: f64,
}

impl SpectralWindow {
    pub fn new(a: f64, b: f64, thresholds: &ThresholdSet) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("window needs finite a < b, got [{a}, {b}]"));
        }
        Ok(Self {
            a,
            b,
            clearance: thresholds.clearance(a, b),
            plateau: DEFAULT_PLATEAU,
        })
    }

    pub fn with_plateau(mut self, plateau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&plateau) {
            return invalid(format!("plateau fraction must lie in [0, 1], got {plateau}"));
        }
        self.plateau = plateau;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn is_cleared(&self) -> bool {
        self.clearance > 0.0
    }

    /// Fails unless the window keeps a positive distance from every threshold.
    pub fn require_cleared(&self) -> Result<&Self> {
        if !self.is_cleared() {
            return invalid(format!("window [{}, {}] touches a threshold", self.a, self.b));
        }
        Ok(self)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn bump(&self) -> Bump {
        Bump {
            a: self.a,
            b: self.b,
            plateau: self.plateau,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{thresholds, FracOrder};

    #[test]
    fn step_and_bump_shapes() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(smooth_cutoff(0.7), 1.0);
        assert_eq!(smooth_cutoff(2.5), 0.0);
        let b = Bump { a: 1.0, b: 3.0, plateau: 0.5 };
        assert_eq!(b.eval(2.0), 1.0);
        assert_eq!(b.eval(1.5), 1.0);
        assert_eq!(b.eval(1.0), 0.0);
        assert!(b.eval(1.2) > 0.0 && b.eval(1.2) < 1.0);
        assert_eq!(b.eval(3.5), 0.0);
    }

    #[test]
    fn clearance_from_thresholds() {
        let thr = thresholds(&FracOrder::scalar(1.0).unwrap());
        let w = SpectralWindow::new(1.0, 3.0, &thr).unwrap();
        assert_eq!(w.clearance(), 1.0);
        let edge = SpectralWindow::new(3.5, 4.0, &thr).unwrap();
        assert_eq!(edge.clearance(), 0.0);
        assert!(edge.require_cleared().is_err());
        assert!(SpectralWindow::new(2.0, 1.0, &thr).is_err());
    }
}
