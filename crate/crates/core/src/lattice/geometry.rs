use crate::error::{geometry, Result};

/// Boundary model shared by every axis of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoxKind {
    /// Sites `0..L` of the half-line, Dirichlet past site 0 and past site `L-1`.
    Half,
    /// The ring `Z/LZ`; a site `k >= L/2` stands for the lattice point `k - L`.
    Periodic,
}

impl BoxKind {
    pub fn name(self) -> &'static str {
        match self {
            BoxKind::Half => "half",
            BoxKind::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for BoxKind {
    type Err = crate::LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(BoxKind::Half),
            "periodic" => Ok(BoxKind::Periodic),
            other => geometry(format!("unknown box kind `{other}` (expected half|periodic)")),
        }
    }
}

/// Finite truncation of `N^d` or `Z^d` with a fixed row-major site order.
///
/// The last axis varies fastest, so in 2D the site `(n0, n1)` has flat index
/// `n0 * L1 + n1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    extents: Vec<usize>,
    kind: BoxKind,
    strides: Vec<usize>,
}

impl LatticeBox {
    pub fn new(extents: &[usize], kind: BoxKind) -> Result<Self> {
        if extents.is_empty() {
            return geometry("a box needs at least one axis");
        }
        if let Some(bad) = extents.iter().position(|&l| l < 2) {
            return geometry(format!("axis {bad} has extent {} (need >= 2)", extents[bad]));
        }
        let mut strides = vec![1usize; extents.len()];
        for axis in (0..extents.len() - 1).rev() {
            strides[axis] = strides[axis + 1]
                .checked_mul(extents[axis + 1])
                .ok_or_else(|| crate::LabError::InvalidGeometry("box size overflows usize".into()))?;
        }
        strides[0]
            .checked_mul(extents[0])
            .ok_or_else(|| crate::LabError::InvalidGeometry("box size overflows usize".into()))?;
        Ok(Self {
            extents: extents.to_vec(),
            kind,
            strides,
        })
    }

    /// Shorthand for a one-dimensional box.
    pub fn line(len: usize, kind: BoxKind) -> Result<Self> {
        Self::new(&[len], kind)
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extents[axis]
    }

    pub fn kind(&self) -> BoxKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.strides[0] * self.extents[0]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index(&self, site: &[usize]) -> Result<usize> {
        if site.len() != self.dims() {
            return geometry(format!("site has {} coordinates, box has {}", site.len(), self.dims()));
        }
        let mut flat = 0;
        for (axis, (&n, &l)) in site.iter().zip(&self.extents).enumerate() {
            if n >= l {
                return geometry(format!("coordinate {n} on axis {axis} outside extent {l}"));
            }
            flat += n * self.strides[axis];
        }
        Ok(flat)
    }

    pub fn deindex(&self, flat: usize) -> Vec<usize> {
        assert!(flat < self.size(), "flat index {flat} outside box of size {}", self.size());
        self.extents
            .iter()
            .zip(&self.strides)
            .map(|(&l, &s)| (flat / s) % l)
            .collect()
    }

    /// Coordinate of `site` along `axis` in the modelled lattice.
    ///
    /// Half boxes return the site itself; periodic boxes return the signed
    /// representative in `[-L/2, L/2)`.
    pub fn coordinate(&self, flat: usize, axis: usize) -> i64 {
        let l = self.extents[axis];
        let n = (flat / self.strides[axis]) % l;
        match self.kind {
            BoxKind::Half => n as i64,
            BoxKind::Periodic => signed_rep(n, l),
        }
    }

    /// Flat index of the neighbour `site + step * e_axis`, if it lies in the box.
    ///
    /// Periodic boxes wrap; half boxes return `None` past either end.
    pub fn neighbor(&self, flat: usize, axis: usize, step: i64) -> Option<usize> {
        let l = self.extents[axis] as i64;
        let stride = self.strides[axis];
        let n = ((flat / stride) % self.extents[axis]) as i64;
        let target = n + step;
        let target = match self.kind {
            BoxKind::Half if (0..l).contains(&target) => target,
            BoxKind::Half => return None,
            BoxKind::Periodic => target.rem_euclid(l),
        };
        Some((flat as i64 + (target - n) * stride as i64) as usize)
    }

    /// Distance to the boundary of `N^d`, `min_j n_j`. Periodic boxes use `|n_j|`.
    pub fn boundary_distance(&self, flat: usize) -> usize {
        (0..self.dims())
            .map(|axis| self.coordinate(flat, axis).unsigned_abs() as usize)
            .min()
            .unwrap_or(0)
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(|flat| self.deindex(flat))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self == other
    }
}

/// Signed representative of `n` on the ring of length `len`, in `[-len/2, len/2)`.
pub fn signed_rep(n: usize, len: usize) -> i64 {
    let n = n as i64;
    let l = len as i64;
    if n >= (l + 1) / 2 {
        n - l
    } else {
        n
    }
}

impl std::fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dims: Vec<String> = self.extents.iter().map(|l| l.to_string()).collect();
        write!(f, "{} box {}", self.kind.name(), dims.join("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_index_is_identity() {
        let b = LatticeBox::line(5, BoxKind::Half).unwrap();
        assert_eq!(b.size(), 5);
        for n in 0..5 {
            assert_eq!(b.index(&[n]).unwrap(), n);
        }
    }

    #[test]
    fn row_major_in_two_dimensions() {
        let b = LatticeBox::new(&[2, 3], BoxKind::Half).unwrap();
        assert_eq!(b.size(), 6);
        assert_eq!(b.index(&[1, 2]).unwrap(), 5);
        assert_eq!(b.deindex(5), vec![1, 2]);
    }

    #[test]
    fn rejects_short_axes() {
        assert!(LatticeBox::new(&[3, 1], BoxKind::Half).is_err());
        assert!(LatticeBox::new(&[0], BoxKind::Periodic).is_err());
        assert!(LatticeBox::new(&[], BoxKind::Half).is_err());
    }

    #[test]
    fn out_of_range_site_is_an_error() {
        let b = LatticeBox::new(&[3, 3], BoxKind::Half).unwrap();
        assert!(b.index(&[3, 0]).is_err());
        assert!(b.index(&[0]).is_err());
    }

    #[test]
    fn periodic_coordinates_are_centred() {
        let b = LatticeBox::line(6, BoxKind::Periodic).unwrap();
        let coords: Vec<i64> = (0..6).map(|i| b.coordinate(i, 0)).collect();
        assert_eq!(coords, vec![0, 1, 2, -3, -2, -1]);
        assert_eq!(b.neighbor(0, 0, -1), Some(5));
        let h = LatticeBox::line(6, BoxKind::Half).unwrap();
        assert_eq!(h.neighbor(0, 0, -1), None);
        assert_eq!(h.neighbor(5, 0, 1), None);
    }

    proptest! {
        #[test]
        fn deindex_inverts_index(extents in prop::collection::vec(2usize..6, 1..4)) {
            let b = LatticeBox::new(&extents, BoxKind::Half).unwrap();
            for flat in 0..b.size() {
                let site = b.deindex(flat);
                prop_assert_eq!(b.index(&site).unwrap(), flat);
            }
        }
    }
}
