//! Modified Bessel functions `I_nu(x)` of integer order.
//!
//! Two independent evaluations are kept: the defining power series with an
//! explicit remainder bound, and Miller's downward recurrence normalized by
//! `e^-x (I_0 + 2 sum_k I_k) = 1`. Both work with `e^-x I_nu(x)` so that the
//! table of heat-kernel values never overflows.

use crate::error::{LabError, Result};

/// Largest argument for which the unscaled value is returned.
pub const OVERFLOW_X: f64 = 700.0;
/// Largest supported order.
pub const MAX_ORDER: u32 = 10_000;

/// Order and argument above which the recurrence replaces the series.
const SERIES_MAX_ORDER: u32 = 30;
const SERIES_MAX_X: f64 = 50.0;

/// A value of `I_nu(x)`, or of `e^-x I_nu(x)` when the plain value would overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselI {
    pub value: f64,
    pub scaled: bool,
}

/// Power-series value of `e^-x I_nu(x)` and a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub scaled: f64,
    pub remainder: f64,
}

fn check(nu: u32, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(LabError::Domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    if nu > MAX_ORDER {
        return Err(LabError::Domain(format!("Bessel order {nu} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^-x I_nu(x)` from `sum_k (x/2)^(2k+nu) / (k! (k+nu)!)`.
///
/// Terms are summed until their ratio `q` drops below 1/2 and the current
/// term is negligible; the tail is then at most `term * q / (1 - q)`.
pub fn series_scaled(nu: u32, x: f64) -> Result<SeriesValue> {
    check(nu, x)?;
    if x == 0.0 {
        let v = if nu == 0 { 1.0 } else { 0.0 };
        return Ok(SeriesValue { scaled: v, remainder: 0.0 });
    }
    let half = 0.5 * x;
    let log_first = nu as f64 * half.ln() - ln_factorial(nu) - x;
    let mut term = log_first.exp();
    let mut sum = term;
    let quarter = half * half;
    let mut k = 0u64;
    loop {
        let ratio = quarter / ((k + 1) as f64 * (k + 1 + nu as u64) as f64);
        term *= ratio;
        sum += term;
        k += 1;
        let next_ratio = quarter / ((k + 1) as f64 * (k + 1 + nu as u64) as f64);
        if next_ratio < 0.5 && term * next_ratio / (1.0 - next_ratio) <= f64::EPSILON * 1e-3 * sum {
            return Ok(SeriesValue {
                scaled: sum,
                remainder: term * next_ratio / (1.0 - next_ratio),
            });
        }
        if term == 0.0 && next_ratio < 1.0 {
            return Ok(SeriesValue { scaled: sum, remainder: 0.0 });
        }
    }
}

/// `e^-x I_k(x)` for `k = 0..=nu_max` by normalized downward recurrence.
pub fn recurrence_scaled_table(nu_max: u32, x: f64) -> Result<Vec<f64>> {
    check(nu_max, x)?;
    let n_out = nu_max as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; n_out];
        out[0] = 1.0;
        return Ok(out);
    }
    // Start well past both the order and the turning point of the recurrence.
    let start = nu_max as usize + x.ceil() as usize + 40 + (12.0 * (x + nu_max as f64 + 1.0).sqrt()) as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        vals[k - 1] = vals[k + 1] + (2.0 * k as f64 / x) * vals[k];
        if vals[k - 1] > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals[1..=start].iter().sum::<f64>();
    Ok(vals[..n_out].iter().map(|v| v / norm).collect())
}

/// `e^-x I_nu(x)`, by series for small order and argument, else by recurrence.
pub fn bessel_i_scaled(nu: u32, x: f64) -> Result<f64> {
    check(nu, x)?;
    if nu <= SERIES_MAX_ORDER && x <= SERIES_MAX_X {
        Ok(series_scaled(nu, x)?.scaled)
    } else {
        Ok(recurrence_scaled_table(nu, x)?[nu as usize])
    }
}

/// `I_nu(x)`; beyond `x = 700` the scaled value is returned and flagged.
pub fn bessel_i(nu: u32, x: f64) -> Result<BesselI> {
    let scaled = bessel_i_scaled(nu, x)?;
    if x > OVERFLOW_X {
        Ok(BesselI { value: scaled, scaled: true })
    } else {
        Ok(BesselI {
            value: scaled * x.exp(),
            scaled: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `I_n(x) = (1/pi) int_0^pi e^(x cos th) cos(n th) d th`, trapezoid rule,
    /// scaled by `e^-x`. Spectrally accurate for this periodic integrand.
    fn integral_oracle(n: u32, x: f64) -> f64 {
        let m = 4000;
        let mut s = 0.0;
        for i in 0..=m {
            let th = PI * i as f64 / m as f64;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            s += w * (x * (th.cos() - 1.0)).exp() * (n as f64 * th).cos();
        }
        s / m as f64
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap().value, 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn i0_of_two() {
        let v = bessel_i(0, 2.0).unwrap();
        assert!(!v.scaled);
        assert!((v.value - 2.279_585_302_3).abs() < 1e-10);
        let oracle = integral_oracle(0, 2.0) * 2f64.exp();
        assert!((v.value - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn series_matches_integral() {
        for &x in &[0.1, 1.0, 2.0, 7.5, 20.0, 49.0] {
            for nu in [0u32, 1, 2, 5, 12, 30] {
                let s = series_scaled(nu, x).unwrap();
                let o = integral_oracle(nu, x);
                // The quadrature cancels O(1) values, so tiny results carry an absolute error.
                assert!((s.scaled - o).abs() <= 1e-12 * o + 1e-15, "nu={nu} x={x}: {} vs {o}", s.scaled);
                assert!(s.remainder <= 1e-15 * s.scaled.max(1e-300));
            }
        }
    }

    #[test]
    fn recurrence_agrees_with_series_in_overlap() {
        for &x in &[0.5, 2.0, 10.0, 40.0, 60.0, 120.0] {
            let table = recurrence_scaled_table(80, x).unwrap();
            for nu in 0..=80u32 {
                let s = series_scaled(nu, x).unwrap().scaled;
                if s > 1e-280 {
                    assert!((table[nu as usize] - s).abs() <= 1e-12 * s, "nu={nu} x={x}");
                }
            }
        }
    }

    #[test]
    fn large_argument_is_scaled() {
        let v = bessel_i(3, 800.0).unwrap();
        assert!(v.scaled);
        // e^-x I_nu(x) ~ 1 / sqrt(2 pi x) for large x.
        let asym = 1.0 / (2.0 * PI * 800.0).sqrt();
        assert!((v.value / asym - 1.0).abs() < 1e-2);
        assert!(bessel_i(0, -1.0).is_err());
        assert!(bessel_i(MAX_ORDER + 1, 1.0).is_err());
    }

    #[test]
    fn large_order_underflows_gracefully() {
        let v = bessel_i(5000, 3.0).unwrap();
        assert_eq!(v.value, 0.0);
        let w = bessel_i(200, 150.0).unwrap().value;
        let s = series_scaled(200, 150.0).unwrap().scaled * 150f64.exp();
        assert!((w - s).abs() <= 1e-12 * s);
    }
}
