use super::geometry::LatticeBox;

/// A positive function of the site, stored in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    lattice: LatticeBox,
    values: Vec<f64>,
}

/// `<x> = (1 + x^2)^(1/2)`.
pub fn japanese(x: f64) -> f64 {
    x.hypot(1.0)
}

impl WeightVector {
    pub fn from_fn(lattice: &LatticeBox, f: impl Fn(usize) -> f64) -> Self {
        Self {
            lattice: lattice.clone(),
            values: (0..lattice.size()).map(f).collect(),
        }
    }

    /// `<n_axis>`.
    pub fn axis_bracket(lattice: &LatticeBox, axis: usize) -> Self {
        Self::from_fn(lattice, |k| japanese(lattice.coordinate(k, axis) as f64))
    }

    /// `Lambda(n) = sum_j <n_j>`.
    pub fn lambda(lattice: &LatticeBox) -> Self {
        Self::from_fn(lattice, |k| {
            (0..lattice.dims())
                .map(|axis| japanese(lattice.coordinate(k, axis) as f64))
                .sum()
        })
    }

    /// `<Lambda(n)>^power`; `power = -s` gives the resolvent weight.
    pub fn lambda_bracket_pow(lattice: &LatticeBox, power: f64) -> Self {
        let lam = Self::lambda(lattice);
        Self {
            lattice: lattice.clone(),
            values: lam.values.iter().map(|&l| japanese(l).powf(power)).collect(),
        }
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxKind;
    use proptest::prelude::*;

    #[test]
    fn lambda_at_origin() {
        let b = LatticeBox::new(&[4, 4], BoxKind::Half).unwrap();
        let w = WeightVector::lambda(&b);
        assert!((w.values()[0] - 2.0).abs() < 1e-15);
        assert!((w.values()[b.index(&[3, 0]).unwrap()] - (10f64.sqrt() + 1.0)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn weights_are_at_least_one(l0 in 2usize..9, l1 in 2usize..9, periodic in any::<bool>()) {
            let kind = if periodic { BoxKind::Periodic } else { BoxKind::Half };
            let b = LatticeBox::new(&[l0, l1], kind).unwrap();
            for w in [WeightVector::lambda(&b), WeightVector::axis_bracket(&b, 1)] {
                prop_assert!(w.values().iter().all(|&v| v >= 1.0));
            }
            let s = WeightVector::lambda_bracket_pow(&b, 1.0);
            prop_assert!(s.values().iter().all(|&v| v >= 1.0));
        }
    }
}
