use crate::error::{geometry, invalid, Result};
use crate::lattice::EigenSystem;
use num_complex::Complex64;

use super::propagation::PHASE_STEP;

#[derive(Debug, Clone, PartialEq)]
pub struct BallisticCell {
    pub v: f64,
    pub t: f64,
    /// `(1/T) int_0^T ||1_{|A| <= v t} e^-itH psi||^2 dt`.
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallisticFit {
    pub v: f64,
    /// `max_T average(T) log(1 + T)`.
    pub constant: f64,
    /// Relative spread of `average(T) log(1 + T)` over the grid.
    pub spread: f64,
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallisticReport {
    pub state_norm_sq: f64,
    pub cells: Vec<BallisticCell>,
    pub fits: Vec<BallisticFit>,
}

/// Time-averaged weight of `e^-itH psi` inside the cone `|A| <= v t`.
///
/// `psi` is used as given; callers apply the energy cutoff beforehand.
pub fn ballistic_diagnostic(
    eig_h: &EigenSystem,
    eig_a: &EigenSystem,
    psi: &[Complex64],
    velocities: &[f64],
    horizons: &[f64],
) -> Result<BallisticReport> {
    let n = eig_h.len();
    if eig_a.len() != n || psi.len() != n {
        return geometry(format!("generator, Hamiltonian and state must share dimension {n}"));
    }
    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    if !(t_max > 0.0) || velocities.is_empty() {
        return invalid("ballistic diagnostic needs positive horizons and at least one velocity");
    }
    let coeffs = eig_h.analyze(psi);
    let active: Vec<usize> = (0..n).filter(|&k| coeffs[k].norm() > 0.0).collect();
    let amp: Vec<Complex64> = active.iter().map(|&k| coeffs[k]).collect();
    let freqs: Vec<f64> = active.iter().map(|&k| eig_h.values()[k]).collect();
    // Columns of the Hamiltonian eigenbasis written in the generator eigenbasis,
    // rows sorted by |alpha| so that cone weights are prefix sums.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig_a.values()[i].abs().total_cmp(&eig_a.values()[j].abs()).then(i.cmp(&j)));
    let abs_alpha: Vec<f64> = order.iter().map(|&i| eig_a.values()[i].abs()).collect();
    let rows: Vec<usize> = (0..n).collect();
    let transfer = &eig_a.vectors().adjoint().select(&order, &rows) * &eig_h.vectors().select(&rows, &active);

    let top = freqs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let dt_target = PHASE_STEP / top;
    let steps = (t_max / dt_target).ceil() as usize;
    let dt = t_max / steps as f64;
    let mut running = vec![0.0; velocities.len()];
    let mut prev = vec![0.0; velocities.len()];
    let mut cumulative: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); velocities.len()];
    for i in 0..=steps {
        let t = i as f64 * dt;
        let phased: Vec<Complex64> = amp.iter().zip(&freqs).map(|(a, &l)| a * Complex64::from_polar(1.0, -l * t)).collect();
        let b = transfer.matvec(&phased);
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for z in &b {
            prefix.push(prefix[prefix.len() - 1] + z.norm_sqr());
        }
        for (vi, &v) in velocities.iter().enumerate() {
            let inside = abs_alpha.partition_point(|&x| x <= v * t);
            let value = prefix[inside];
            if i > 0 {
                running[vi] += 0.5 * dt * (prev[vi] + value);
            }
            prev[vi] = value;
            cumulative[vi].push(running[vi]);
        }
    }
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    for (vi, &v) in velocities.iter().enumerate() {
        let mut scaled = Vec::new();
        let mut averages = Vec::new();
        for &t in horizons {
            let idx = ((t / dt).round() as usize).min(steps);
            let tt = idx as f64 * dt;
            let average = if tt > 0.0 { cumulative[vi][idx] / tt } else { prev[vi] };
            cells.push(BallisticCell { v, t, average });
            scaled.push(average * (1.0 + t).ln());
            averages.push(average);
        }
        let constant = scaled.iter().copied().fold(0.0, f64::max);
        let low = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        fits.push(BallisticFit {
            v,
            constant,
            spread: if constant > 0.0 { (constant - low) / constant } else { 0.0 },
            non_increasing: averages.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
        });
    }
    Ok(BallisticReport {
        state_norm_sq: psi.iter().map(|z| z.norm_sqr()).sum(),
        cells,
        fits,
    })
}
