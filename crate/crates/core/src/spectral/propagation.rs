use crate::error::{geometry, invalid, Result};
use crate::lattice::EigenSystem;
use num_complex::Complex64;

/// Largest `|lambda| dt` of the quadrature.
pub const PHASE_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    /// `||<Lambda>^-s e^-itH phi(H) <Lambda>^-s f||^2` at each time.
    pub integrand: Vec<f64>,
    /// Integral over `[-t, t]` by the trapezoid rule.
    pub cumulative: Vec<f64>,
    /// Last-step increment of the cumulative integral.
    pub tail_increment: f64,
    /// Total integral divided by `||f||^2`.
    pub c_estimate: f64,
}

/// `e^-itH g` through the eigen-expansion.
pub fn evolve(eig: &EigenSystem, g: &[Complex64], t: f64) -> Vec<Complex64> {
    let c = eig.analyze(g);
    let phased: Vec<Complex64> = c
        .iter()
        .zip(eig.values())
        .map(|(z, &l)| z * Complex64::from_polar(1.0, -l * t))
        .collect();
    eig.expand(&phased)
}

fn trapezoid_step(eig: &EigenSystem, t_max: f64) -> (usize, f64) {
    let top = eig.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let steps = (t_max * top / PHASE_STEP).ceil().max(1.0) as usize;
    (steps, t_max / steps as f64)
}

/// `integral_{-T}^{T} ||w e^-itH phi(H) w f||^2 dt` with `w = <Lambda>^-s` given as `weight`.
pub fn propagation_integral(
    eig: &EigenSystem,
    phi: impl Fn(f64) -> f64,
    weight: &[f64],
    f: &[f64],
    t_max: f64,
) -> Result<PropagationResult> {
    let n = eig.len();
    if weight.len() != n || f.len() != n {
        return geometry(format!("weight and vector lengths must equal the dimension {n}"));
    }
    if !(t_max > 0.0) {
        return invalid(format!("time horizon must be positive, got {t_max}"));
    }
    let g: Vec<Complex64> = f.iter().zip(weight).map(|(x, w)| Complex64::new(x * w, 0.0)).collect();
    let coeffs = eig.analyze(&g);
    let active: Vec<usize> = (0..n).filter(|&k| phi(eig.values()[k]) != 0.0 && coeffs[k].norm() != 0.0).collect();
    let amp: Vec<Complex64> = active.iter().map(|&k| coeffs[k] * phi(eig.values()[k])).collect();
    let rows: Vec<usize> = (0..n).collect();
    let ones = vec![1.0; active.len()];
    let basis = eig.vectors().select(&rows, &active).scale_rows_cols(weight, &ones);
    let freqs: Vec<f64> = active.iter().map(|&k| eig.values()[k]).collect();
    let real_problem = eig.vectors().is_real();

    let (steps, dt) = trapezoid_step(eig, t_max);
    let sample = |t: f64| -> f64 {
        let phased: Vec<Complex64> = amp.iter().zip(&freqs).map(|(a, &l)| a * Complex64::from_polar(1.0, -l * t)).collect();
        basis.matvec(&phased).iter().map(|z| z.norm_sqr()).sum()
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut integrand = Vec::with_capacity(steps + 1);
    let mut cumulative = Vec::with_capacity(steps + 1);
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut tail_increment = 0.0;
    for i in 0..=steps {
        let t = i as f64 * dt;
        // Real H and f make the integrand even in t.
        let value = if real_problem { sample(t) } else { 0.5 * (sample(t) + sample(-t)) };
        if i > 0 {
            tail_increment = dt * (prev + value);
            total += tail_increment;
        }
        prev = value;
        times.push(t);
        integrand.push(value);
        cumulative.push(total);
    }
    let norm_sq: f64 = f.iter().map(|x| x * x).sum();
    Ok(PropagationResult {
        times,
        integrand,
        cumulative,
        tail_increment,
        c_estimate: if norm_sq > 0.0 { total / norm_sq } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{thresholds, FracOrder};
    use crate::lattice::{laplacian, BoxKind, LatticeBox, WeightVector};
    use crate::mourre::SpectralWindow;

    #[test]
    fn evolution_is_unitary() {
        let lat = LatticeBox::line(80, BoxKind::Half).unwrap();
        let eig = EigenSystem::new(&laplacian(&lat)).unwrap();
        let mut f = vec![Complex64::new(0.0, 0.0); 80];
        f[0] = Complex64::new(1.0, 0.0);
        for &t in &[0.0, 1.0, 37.5, 200.0] {
            let norm: f64 = evolve(&eig, &f, t).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn corner_delta_integral_converges() {
        let len = 400;
        let lat = LatticeBox::line(len, BoxKind::Half).unwrap();
        let eig = EigenSystem::new(&laplacian(&lat)).unwrap();
        let window = SpectralWindow::new(1.0, 3.0, &thresholds(&FracOrder::scalar(1.0).unwrap())).unwrap();
        let bump = window.bump();
        let weight = WeightVector::lambda_bracket_pow(&lat, -1.0);
        let mut f = vec![0.0; len];
        f[0] = 1.0;
        let res = propagation_integral(&eig, |x| bump.eval(x), weight.values(), &f, 200.0).unwrap();
        assert!(res.tail_increment < 1e-6, "{}", res.tail_increment);
        assert!(res.cumulative.windows(2).all(|w| w[1] >= w[0]));
        assert!(res.integrand.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn disjoint_cutoffs_give_zero() {
        let len = 60;
        let lat = LatticeBox::line(len, BoxKind::Half).unwrap();
        let eig = EigenSystem::new(&laplacian(&lat)).unwrap();
        let weight = WeightVector::lambda_bracket_pow(&lat, -1.0);
        let mut f = vec![0.0; len];
        f[3] = 1.0;
        let zero = propagation_integral(&eig, |_| 0.0, weight.values(), &f, 20.0).unwrap();
        assert_eq!(zero.cumulative.last().copied(), Some(0.0));
        // An eigenvector at 0.5 seen through a cutoff on [1, 3]; the weights are
        // undone so that phi(H) acts on the eigenvector itself.
        let k = eig.window(0.4, 0.6)[0];
        let v: Vec<f64> = (0..len).map(|i| eig.vectors().get(i, k).re / weight.values()[i]).collect();
        let bump = crate::mourre::Bump { a: 1.0, b: 3.0, plateau: 0.5 };
        let res = propagation_integral(&eig, |x| bump.eval(x), weight.values(), &v, 20.0).unwrap();
        assert!(res.cumulative.last().unwrap().abs() < 1e-12);
    }
}
