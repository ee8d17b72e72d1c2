use crate::error::{geometry, invalid, Result};
use crate::fractional::RingKernel;
use crate::lattice::{BoxKind, CMat, LatticeBox, OperatorMatrix};
use nalgebra::DMatrix;

/// Imaginary parts below this are rounding noise of a real commutator.
const IMAG_PRUNE: f64 = 1e-15;

/// `i (H A - A H)` for `order = 1`; `order = 2` applies the bracket twice.
pub fn form_commutator(h: &OperatorMatrix, a: &OperatorMatrix, order: u32) -> Result<OperatorMatrix> {
    if !h.lattice().same_shape(a.lattice()) || h.lattice().kind() != a.lattice().kind() {
        return geometry(format!("commutator of operators on {} and {}", h.lattice(), a.lattice()));
    }
    if !(1..=2).contains(&order) {
        return invalid(format!("commutator order must be 1 or 2, got {order}"));
    }
    let mut c = bracket(h.entries(), a.entries());
    if order == 2 {
        c = bracket(&c, a.entries());
    }
    let scale = h.max_abs().max(a.max_abs()).max(1.0);
    OperatorMatrix::new(h.lattice().clone(), c.prune_imaginary(IMAG_PRUNE * scale * scale), true)
}

fn bracket(h: &CMat, a: &CMat) -> CMat {
    (&(h * a) - &(a * h)).mul_i()
}

/// `[T, iA]` for a translation-invariant `T = sum_j T_j` on `Z^d`, evaluated
/// through its kernel `C_j(k) = (s_j / 2) [(k - 1) T_j(k - 1) - (k + 1) T_j(k + 1)]`
/// and wrapped onto a periodic box.
///
/// Each `kernels[j]` must live on a ring of the box's extent along axis `j`.
pub fn circulant_commutator(lattice: &LatticeBox, kernels: &[RingKernel], signs: &[f64]) -> Result<OperatorMatrix> {
    if lattice.kind() != BoxKind::Periodic {
        return geometry(format!("circulant commutator needs a periodic box, got {lattice}"));
    }
    if kernels.len() != lattice.dims() || signs.len() != lattice.dims() {
        return geometry(format!(
            "{} kernels and {} signs for a {}-dimensional box",
            kernels.len(),
            signs.len(),
            lattice.dims()
        ));
    }
    for (j, k) in kernels.iter().enumerate() {
        if k.len() != lattice.extent(j) {
            return geometry(format!("axis {j} kernel has ring {} but the box extent is {}", k.len(), lattice.extent(j)));
        }
    }
    let axis_kernels: Vec<Vec<f64>> = kernels
        .iter()
        .zip(signs)
        .map(|(t, &s)| {
            let l = t.len();
            (0..l)
                .map(|raw| {
                    let k = crate::lattice::signed_rep(raw, l);
                    0.5 * s.signum() * ((k - 1) as f64 * t.at(k - 1) - (k + 1) as f64 * t.at(k + 1))
                })
                .collect()
        })
        .collect();
    let n = lattice.size();
    let sites: Vec<Vec<usize>> = lattice.sites().collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (&sites[i], &sites[j]);
        let mut total = 0.0;
        for axis in 0..lattice.dims() {
            let others_match = (0..lattice.dims()).all(|o| o == axis || a[o] == b[o]);
            if others_match {
                let l = lattice.extent(axis);
                total += axis_kernels[axis][(a[axis] + l - b[axis]) % l];
            }
        }
        total
    });
    OperatorMatrix::new(lattice.clone(), CMat::real(m), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{frac_power, PowerMethod};
    use crate::lattice::{laplacian, EigenSystem, PowerFloor};
    use crate::mourre::{build_conjugate, Flavor};

    fn half_a(len: usize) -> OperatorMatrix {
        let lat = LatticeBox::line(len, BoxKind::Half).unwrap();
        build_conjugate(&lat, &[1.0], Flavor::HalfLattice).unwrap().into_op()
    }

    #[test]
    fn identity_commutes() {
        let a = half_a(20);
        let id = OperatorMatrix::identity(a.lattice());
        assert_eq!(form_commutator(&id, &a, 1).unwrap().max_abs(), 0.0);
        assert_eq!(form_commutator(&id, &a, 2).unwrap().max_abs(), 0.0);
        assert!(form_commutator(&id, &a, 3).is_err());
    }

    #[test]
    fn laplacian_commutator_is_hermitian_and_real() {
        let a = half_a(60);
        let c = form_commutator(&laplacian(a.lattice()), &a, 1).unwrap();
        assert!(c.is_real());
        assert!(c.entries().hermitian_residual() <= 1e-12);
        // Bulk rows carry 1 on the diagonal and -1/2 two sites away.
        assert!((c.get(30, 30).re - 1.0).abs() < 1e-14);
        assert!((c.get(30, 32).re + 0.5).abs() < 1e-14);
        assert!(c.get(30, 31).re.abs() < 1e-14);
    }

    #[test]
    fn box_mismatch_is_rejected() {
        let a = half_a(10);
        let other = laplacian(&LatticeBox::line(11, BoxKind::Half).unwrap());
        assert!(form_commutator(&other, &a, 1).is_err());
    }

    #[test]
    fn circulant_formula_matches_products_in_the_bulk() {
        let len = 64;
        let ring = LatticeBox::line(len, BoxKind::Periodic).unwrap();
        let a = build_conjugate(&ring, &[1.0], Flavor::Bilateral).unwrap().into_op();
        for r in [1.0, 2.0] {
            let t = frac_power(&ring, r, PowerMethod::Circulant, PowerFloor::default()).unwrap().op;
            let product = form_commutator(&t, &a, 1).unwrap();
            let kernel = RingKernel::power(len, r).unwrap();
            let formula = circulant_commutator(&ring, &[kernel], &[1.0]).unwrap();
            // Rows near signed coordinate 0 never touch the seam for banded T.
            for i in [0usize, 1, 2, 62, 63] {
                for j in 0..len {
                    assert!((product.get(i, j).re - formula.get(i, j).re).abs() < 1e-10, "r={r} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn periodic_commutators_commute_with_the_laplacian() {
        let len = 96;
        let ring = LatticeBox::line(len, BoxKind::Periodic).unwrap();
        let lap = laplacian(&ring);
        for r in [1.0, 2.0, 0.5] {
            let kernel = RingKernel::power(len, r).unwrap();
            let c = circulant_commutator(&ring, &[kernel], &[1.0]).unwrap();
            let lc = lap.try_mul(&c).unwrap();
            let cl = c.try_mul(&lap).unwrap();
            assert!(lc.max_abs_diff(&cl) < 1e-9, "r={r}");
            let _ = EigenSystem::new(&c).unwrap();
        }
    }
}
