use super::dense::CMat;
use super::geometry::{BoxKind, LatticeBox};
use super::operator::OperatorMatrix;
use crate::error::{geometry, Result};
use nalgebra::DMatrix;

/// Embedding of a half box into a larger window.
///
/// The half-box site `n` sits at the window site with the same coordinates.
/// For a periodic window this is the point `n` of the ring, so the half box
/// occupies the non-negative quadrant of a window centred at the origin.
#[derive(Debug, Clone)]
pub struct Embedding {
    window: LatticeBox,
    half: LatticeBox,
    map: Vec<usize>,
}

impl Embedding {
    pub fn new(window: &LatticeBox, half: &LatticeBox) -> Result<Self> {
        if half.kind() != BoxKind::Half {
            return geometry(format!("restriction target must be a half box, got {half}"));
        }
        if window.dims() != half.dims() {
            return geometry(format!("{window} and {half} differ in dimension"));
        }
        for axis in 0..half.dims() {
            let (lz, ln) = (window.extent(axis), half.extent(axis));
            let fits = match window.kind() {
                BoxKind::Half => ln <= lz,
                // The ring must hold [0, ln) without wrapping onto negative sites.
                BoxKind::Periodic => 2 * ln <= lz,
            };
            if !fits {
                return geometry(format!("{half} does not embed in {window} on axis {axis}"));
            }
        }
        let map = half
            .sites()
            .map(|site| window.index(&site))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            window: window.clone(),
            half: half.clone(),
            map,
        })
    }

    pub fn window(&self) -> &LatticeBox {
        &self.window
    }

    pub fn half(&self) -> &LatticeBox {
        &self.half
    }

    /// Window index of each half-box site.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `R_+`, of shape `|half| x |window|`.
    pub fn r_plus(&self) -> DMatrix<f64> {
        let mut r = DMatrix::zeros(self.half.size(), self.window.size());
        for (i, &k) in self.map.iter().enumerate() {
            r[(i, k)] = 1.0;
        }
        r
    }

    /// `J_+ = R_+^dagger`, extension by zero.
    pub fn j_plus(&self) -> DMatrix<f64> {
        self.r_plus().transpose()
    }

    /// `P = J_+ R_+` on the window.
    pub fn projection(&self) -> OperatorMatrix {
        let n = self.window.size();
        let mut p = DMatrix::zeros(n, n);
        for &k in &self.map {
            p[(k, k)] = 1.0;
        }
        OperatorMatrix::real_symmetric(self.window.clone(), p).expect("diagonal projection")
    }

    /// `R_+ M J_+` as an operator on the half box.
    pub fn compress(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.lattice() != &self.window {
            return geometry(format!("operator lives on {}, expected {}", op.lattice(), self.window));
        }
        let block = op.entries().select(&self.map, &self.map);
        OperatorMatrix::new(self.half.clone(), block, op.is_hermitian())
    }

    pub fn restrict_vec(&self, f: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&k| f[k]).collect()
    }

    pub fn extend_vec(&self, g: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.window.size()];
        for (&k, &v) in self.map.iter().zip(g) {
            f[k] = v;
        }
        f
    }
}

/// `(R_+, J_+, P)` for the pair of boxes.
pub fn build_restriction(window: &LatticeBox, half: &LatticeBox) -> Result<(DMatrix<f64>, DMatrix<f64>, OperatorMatrix)> {
    let e = Embedding::new(window, half)?;
    Ok((e.r_plus(), e.j_plus(), e.projection()))
}

/// Extends a half-box matrix by zero to the window: `J_+ M R_+`.
pub fn extend_matrix(e: &Embedding, m: &CMat) -> CMat {
    let n = e.window().size();
    let mut re = DMatrix::zeros(n, n);
    let mut im = m.im().map(|_| DMatrix::zeros(n, n));
    for (i, &a) in e.map().iter().enumerate() {
        for (j, &b) in e.map().iter().enumerate() {
            re[(a, b)] = m.re()[(i, j)];
            if let (Some(t), Some(s)) = (im.as_mut(), m.im()) {
                t[(a, b)] = s[(i, j)];
            }
        }
    }
    CMat::from_parts(re, im)
}
