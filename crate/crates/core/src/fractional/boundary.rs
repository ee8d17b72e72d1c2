//! The boundary correction `K_r = Delta_N^r - R_+ Delta_Z^r J_+`.
//!
//! On the half line `K_r` is a Hankel matrix, `K_r(n, m) = -T(n + m + 2)` with
//! `T` the kernel of `Delta_Z^r`. Two constructions are provided: the binomial
//! series over walk deficits and the direct finite-section subtraction.

use super::coeff::{gen_binomials, CoeffTable};
use super::order::FracOrder;
use super::power::{circulant_function, frac_power, kronecker_sum, PowerMethod};
use super::walk::{walk_deficit, WalkMethod};
use crate::error::{geometry, invalid, LabError, Result};
use crate::lattice::linalg::{hs_norm, singular_values};
use crate::lattice::{BoxKind, CMat, Embedding, LatticeBox, OperatorMatrix, PowerFloor};
use nalgebra::DMatrix;
use num_traits::ToPrimitive;

/// Entries at or below this size count as zero when measuring the collar.
pub const COLLAR_TOL: f64 = 1e-10;

/// Sizes used by the direct subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionWindow {
    /// Corner block on which the correction is reported.
    pub block: usize,
    /// Half box on which `Delta_N^r` is diagonalized.
    pub half_len: usize,
    /// Ring on which `Delta_Z^r` is evaluated.
    pub ring_len: usize,
}

impl SectionWindow {
    /// Block `b`, half box `4b`, ring `ring_len`.
    pub fn new(block: usize, ring_len: usize) -> Result<Self> {
        Self::with_half(block, 4 * block, ring_len)
    }

    pub fn with_half(block: usize, half_len: usize, ring_len: usize) -> Result<Self> {
        if block < 2 {
            return geometry(format!("block must hold at least 2 sites, got {block}"));
        }
        if half_len < 4 * block {
            return geometry(format!("half box {half_len} is less than 4x the block {block}"));
        }
        if ring_len < 4 * half_len {
            return geometry(format!("ring {ring_len} is less than 4x the half box {half_len}"));
        }
        Ok(Self {
            block,
            half_len,
            ring_len,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    Series {
        h_max: usize,
        /// Upper bound on the operator norm of the omitted terms.
        tail_bound: f64,
        /// `|c_h| * ||D_h||` for `h = 2..=h_max`.
        term_norms: Vec<f64>,
    },
    Section {
        window: SectionWindow,
        regularized: usize,
    },
}

#[derive(Debug, Clone)]
pub struct BoundaryCorrection {
    pub matrix: OperatorMatrix,
    /// Collar thickness `M`: entries between sites at distance `>= M` from the
    /// boundary vanish.
    pub collar_width: usize,
    pub construction: Construction,
}

/// Series coefficients `c_h = -(-1)^h C(r,h) 2^(r-h)`, so `K_r = sum_h c_h D_h`.
pub fn series_coefficients(r: f64, h_max: usize) -> Vec<f64> {
    gen_binomials(r, h_max)
        .iter()
        .enumerate()
        .map(|(h, c)| {
            let sign = if h % 2 == 0 { -1.0 } else { 1.0 };
            sign * c * 2f64.powf(r - h as f64)
        })
        .collect()
}

/// Bound on `||sum_{h > h_max} c_h D_h||` from `||D_h|| <= 2^h`.
///
/// That gives `2^r sum_{h > h_max} |C(r,h)|`. The sum is accumulated exactly
/// for a million terms; the remainder uses `|C(r,h)| <= |C(r,H)| ((H+1)/(h+1))^(1+r)`
/// for `h > H > r`. Infinite when `r < 0`, zero when the series terminates.
pub fn series_tail_bound(r: f64, h_max: usize) -> f64 {
    if r.fract() == 0.0 && r >= 0.0 && h_max as f64 >= r {
        return 0.0;
    }
    if r < 0.0 {
        return f64::INFINITY;
    }
    const EXTRA: usize = 1_000_000;
    let mut c = gen_binomials(r, h_max).last().copied().unwrap_or(1.0);
    let mut sum = 0.0;
    let mut h = h_max;
    for _ in 0..EXTRA {
        h += 1;
        c = c * (r - h as f64 + 1.0) / h as f64;
        sum += c.abs();
    }
    let remainder = c.abs() * (h as f64 + 1.0) / r;
    2f64.powf(r) * (sum + remainder)
}

/// `K_r` on a half line from the walk-deficit series truncated at `h_max`.
pub fn k_series(lattice: &LatticeBox, r: f64, h_max: usize) -> Result<BoundaryCorrection> {
    if r == 0.0 || !r.is_finite() {
        return invalid(format!("exponent must be finite and nonzero, got {r}"));
    }
    if lattice.dims() != 1 || lattice.kind() != BoxKind::Half {
        return geometry(format!("series correction needs a one-dimensional half box, got {lattice}"));
    }
    if h_max < 2 {
        return invalid(format!("h_max must be at least 2, got {h_max}"));
    }
    let len = lattice.size();
    if len < 4 * h_max {
        return Err(LabError::WindowOverflow(format!(
            "series to h_max = {h_max} needs {} sites, box has {len}",
            4 * h_max
        )));
    }
    let coeffs = series_coefficients(r, h_max);
    let table = CoeffTable::new(h_max)?;
    let mut k = DMatrix::zeros(len, len);
    let mut term_norms = Vec::with_capacity(h_max - 1);
    // Ascending h keeps the floating-point reduction order fixed.
    for (h, &c) in coeffs.iter().enumerate().take(h_max + 1).skip(2) {
        for p in (h % 2..=h - 2).step_by(2) {
            let beta = table.beta(h, p).to_f64().unwrap_or(f64::INFINITY);
            for a in 0..=p {
                k[(a, p - a)] += c * beta;
            }
        }
        term_norms.push(c.abs() * d_h_norm(h)?);
    }
    let matrix = OperatorMatrix::real_symmetric(lattice.clone(), k)?;
    Ok(BoundaryCorrection {
        matrix,
        collar_width: h_max,
        construction: Construction::Series {
            h_max,
            tail_bound: series_tail_bound(r, h_max),
            term_norms,
        },
    })
}

/// Operator norm of `D_h`, from its `(h-1) x (h-1)` support block.
pub fn d_h_norm(h: usize) -> Result<f64> {
    if h < 2 {
        return Ok(0.0);
    }
    let d = walk_deficit(4 * h, h, WalkMethod::Factorized)?;
    let s = h - 1;
    let block = DMatrix::from_fn(s, s, |i, j| d.get(i, j) as f64);
    Ok(singular_values(&CMat::real(block))[0])
}

/// `K_r` by direct subtraction of finite sections, on the corner block.
pub fn k_definitional(r: f64, window: SectionWindow) -> Result<BoundaryCorrection> {
    let half = LatticeBox::line(window.half_len, BoxKind::Half)?;
    let ring = LatticeBox::line(window.ring_len, BoxKind::Periodic)?;
    let half_op = frac_power(&half, r, PowerMethod::Spectral, PowerFloor::default())?;
    let ring_op = frac_power(&ring, r, PowerMethod::Circulant, PowerFloor::default())?;
    let compressed = Embedding::new(&ring, &half)?.compress(&ring_op.op)?;
    let full = half_op.op.try_sub(&compressed)?;
    let idx: Vec<usize> = (0..window.block).collect();
    let block_box = LatticeBox::line(window.block, BoxKind::Half)?;
    let matrix = OperatorMatrix::new(block_box, full.entries().select(&idx, &idx), true)?;
    let collar_width = measure_collar(&matrix, COLLAR_TOL);
    Ok(BoundaryCorrection {
        matrix,
        collar_width,
        construction: Construction::Section {
            window,
            regularized: half_op.regularized + ring_op.regularized,
        },
    })
}

/// Smallest `M` with `|K(n, m)| <= tol` whenever both sites lie at distance
/// `>= M` from the boundary.
pub fn measure_collar(k: &OperatorMatrix, tol: f64) -> usize {
    let lat = k.lattice();
    let n = lat.size();
    let dist: Vec<usize> = (0..n).map(|s| lat.boundary_distance(s)).collect();
    // Largest min(dist(a), dist(b)) over entries above tolerance.
    let mut worst: Option<usize> = None;
    for a in 0..n {
        for b in 0..n {
            if k.get(a, b).norm() > tol {
                let d = dist[a].min(dist[b]);
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
        }
    }
    worst.map_or(0, |d| d + 1)
}

/// `max |K(n, m)|` over sites both at distance `>= m` from the boundary.
pub fn outside_collar(k: &OperatorMatrix, m: usize) -> f64 {
    let lat = k.lattice();
    let far: Vec<usize> = (0..lat.size()).filter(|&s| lat.boundary_distance(s) >= m).collect();
    let mut worst: f64 = 0.0;
    for &a in &far {
        for &b in &far {
            worst = worst.max(k.get(a, b).norm());
        }
    }
    worst
}

/// `sum_j I x Delta_j^(r_j) x I` on the box, each axis by `method`.
pub fn assemble_nd(order: &FracOrder, lattice: &LatticeBox, method: PowerMethod) -> Result<OperatorMatrix> {
    if order.dims() != lattice.dims() {
        return geometry(format!("order has {} components, {lattice} has {} axes", order.dims(), lattice.dims()));
    }
    let parts = axis_powers(order, lattice, method)?;
    OperatorMatrix::real_symmetric(lattice.clone(), kronecker_sum(lattice, &parts)?)
}

fn axis_powers(order: &FracOrder, lattice: &LatticeBox, method: PowerMethod) -> Result<Vec<DMatrix<f64>>> {
    order
        .exponents()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let axis = LatticeBox::line(lattice.extent(j), lattice.kind())?;
            Ok(frac_power(&axis, r, method, PowerFloor::default())?.op.re().clone())
        })
        .collect()
}

/// Multi-dimensional correction, by subtraction and as a tensor sum of 1D terms.
#[derive(Debug, Clone)]
pub struct NdCorrection {
    /// `Delta_N^r - R_+ Delta_Z^r J_+` on the half box.
    pub definitional: OperatorMatrix,
    /// `sum_j I x K_(r_j) x I` with the same 1D sections.
    pub tensor: OperatorMatrix,
    /// `max |definitional - tensor|`, the lower-dimensional face terms.
    pub residual: f64,
}

/// Both constructions of the correction on `half`, with rings `ring_factor` times longer.
pub fn k_nd(order: &FracOrder, half: &LatticeBox, ring_factor: usize) -> Result<NdCorrection> {
    if half.kind() != BoxKind::Half {
        return geometry(format!("correction lives on a half box, got {half}"));
    }
    if ring_factor < 4 {
        return geometry(format!("ring factor {ring_factor} is below 4"));
    }
    let ring_ext: Vec<usize> = half.extents().iter().map(|l| l * ring_factor).collect();
    let ring = LatticeBox::new(&ring_ext, BoxKind::Periodic)?;
    let half_op = assemble_nd(order, half, PowerMethod::Spectral)?;
    let ring_parts = order
        .exponents()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let axis = LatticeBox::line(ring_ext[j], BoxKind::Periodic)?;
            Ok(circulant_function(&axis, |s| if s <= 0.0 { 0.0 } else { s.powf(r) })?.re().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let ring_op = OperatorMatrix::real_symmetric(ring.clone(), kronecker_sum(&ring, &ring_parts)?)?;
    let definitional = half_op.try_sub(&Embedding::new(&ring, half)?.compress(&ring_op)?)?;

    let half_parts = axis_powers(order, half, PowerMethod::Spectral)?;
    let k_parts: Vec<DMatrix<f64>> = half_parts
        .iter()
        .zip(&ring_parts)
        .map(|(h, z)| {
            let l = h.nrows();
            h - z.view((0, 0), (l, l))
        })
        .collect();
    let tensor = OperatorMatrix::real_symmetric(half.clone(), kronecker_sum(half, &k_parts)?)?;
    let residual = definitional.max_abs_diff(&tensor);
    Ok(NdCorrection {
        definitional,
        tensor,
        residual,
    })
}

/// Singular values, HS tails, weighted HS norms and the collar check.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessReport {
    pub singular_values: Vec<f64>,
    pub hs_norm: f64,
    /// `(R, ||K - chi_R K chi_R||_HS)` with `chi_R` the sites with `max_j n_j <= R`.
    pub hs_tails: Vec<(usize, f64)>,
    /// `(s, ||W_s K||_HS)`.
    pub weighted_hs: Vec<(f64, f64)>,
    pub collar: usize,
    /// `max |chi_M^perp K chi_M^perp|`.
    pub outside_collar: f64,
}

/// `W_s(n) = sum_j <|n_perp^(j)|>^(-s) 1{n_j < M}`, with `n_perp^(j)` the
/// coordinates other than `j` and `M` the collar thickness.
pub fn tangential_weight(lattice: &LatticeBox, s: f64, collar: usize) -> Vec<f64> {
    (0..lattice.size())
        .map(|site| {
            let coords: Vec<f64> = (0..lattice.dims()).map(|j| lattice.coordinate(site, j) as f64).collect();
            let total_sq: f64 = coords.iter().map(|x| x * x).sum();
            (0..lattice.dims())
                .filter(|&j| coords[j].abs() < collar as f64)
                .map(|j| (1.0 + total_sq - coords[j] * coords[j]).sqrt().powf(-s))
                .sum()
        })
        .collect()
}

pub fn compactness_report(k: &OperatorMatrix, s_values: &[f64], collar: usize, radii: &[usize]) -> CompactnessReport {
    let lat = k.lattice();
    let n = lat.size();
    let sv = singular_values(k.entries());
    let max_coord: Vec<usize> = (0..n)
        .map(|site| (0..lat.dims()).map(|j| lat.coordinate(site, j).unsigned_abs() as usize).max().unwrap_or(0))
        .collect();
    let hs_tails = radii
        .iter()
        .map(|&radius| {
            let mut sum = 0.0;
            for a in 0..n {
                for b in 0..n {
                    if max_coord[a] > radius || max_coord[b] > radius {
                        sum += k.get(a, b).norm_sqr();
                    }
                }
            }
            (radius, sum.sqrt())
        })
        .collect();
    let weighted_hs = s_values
        .iter()
        .map(|&s| {
            let w = tangential_weight(lat, s, collar);
            let weighted = k.entries().scale_rows_cols(&w, &vec![1.0; n]);
            (s, hs_norm(&weighted))
        })
        .collect();
    CompactnessReport {
        singular_values: sv,
        hs_norm: hs_norm(k.entries()),
        hs_tails,
        weighted_hs,
        collar,
        outside_collar: outside_collar(k, collar),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::linalg::{numerical_rank, op_norm};
    use std::f64::consts::PI;

    fn half(len: usize) -> LatticeBox {
        LatticeBox::line(len, BoxKind::Half).unwrap()
    }

    #[test]
    fn first_order_correction_vanishes() {
        let k = k_series(&half(16), 1.0, 4).unwrap();
        assert_eq!(k.matrix.max_abs(), 0.0);
        assert!(matches!(k.construction, Construction::Series { tail_bound, .. } if tail_bound == 0.0));
    }

    #[test]
    fn second_order_correction_is_minus_corner() {
        let k = k_series(&half(32), 2.0, 8).unwrap();
        let mut expect = DMatrix::zeros(32, 32);
        expect[(0, 0)] = -1.0;
        assert_eq!(k.matrix.re(), &expect);

        let d = k_definitional(2.0, SectionWindow::new(8, 128).unwrap()).unwrap();
        let mut expect = DMatrix::zeros(8, 8);
        expect[(0, 0)] = -1.0;
        assert!((d.matrix.re() - expect).amax() < 1e-8);
        assert_eq!(d.collar_width, 1);
    }

    #[test]
    fn integer_order_ranks() {
        for (r, bound) in [(2.0, 1), (3.0, 3), (4.0, 6)] {
            let d = k_definitional(r, SectionWindow::new(16, 256).unwrap()).unwrap();
            let rank = numerical_rank(&singular_values(d.matrix.entries()), 1e-10);
            assert!(rank <= bound, "r = {r}: rank {rank}");
            let s = k_series(&half(64), r, 16).unwrap();
            let rank = numerical_rank(&singular_values(s.matrix.entries()), 1e-10);
            assert!(rank <= bound, "r = {r}: series rank {rank}");
        }
    }

    #[test]
    fn series_matches_bilateral_kernel_for_integer_orders() {
        // K_r(n, m) = -T(n + m + 2) with T the banded kernel of (2 - U - U*)^r.
        for r in 2..=5u32 {
            let k = k_series(&half(64), r as f64, 12).unwrap();
            let kernel = |d: i64| -> f64 {
                let (r, d) = (r as i64, d.abs());
                if d > r {
                    return 0.0;
                }
                let mut c = 1.0;
                for i in 0..(r + d) {
                    c *= (2 * r - i) as f64 / (i + 1) as f64;
                }
                if d % 2 == 0 { c } else { -c }
            };
            for a in 0..12 {
                for b in 0..12 {
                    let expect = -kernel((a + b + 2) as i64);
                    assert!((k.matrix.re()[(a, b)] - expect).abs() < 1e-12, "r={r} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn half_order_section_matches_closed_form() {
        // For r = 1/2 the bilateral kernel is -4 / (pi (4k^2 - 1)).
        let d = k_definitional(0.5, SectionWindow::new(16, 1024).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        for a in 0..16 {
            for b in 0..16 {
                let k = (a + b + 2) as f64;
                let expect = 4.0 / (PI * (4.0 * k * k - 1.0));
                worst = worst.max((d.matrix.re()[(a, b)] - expect).abs());
            }
        }
        // Far-edge reflections of the 64-site half box dominate the error.
        assert!(worst < 2e-5, "{worst:e}");
    }

    #[test]
    fn partial_sums_respect_tail_bound() {
        let lat = half(160);
        let k20 = k_series(&lat, 0.5, 20).unwrap();
        let k40 = k_series(&lat, 0.5, 40).unwrap();
        let diff = op_norm(k40.matrix.try_sub(&k20.matrix).unwrap().entries());
        let Construction::Series { tail_bound, term_norms, .. } = &k20.construction else {
            unreachable!()
        };
        assert!(diff <= *tail_bound, "{diff} > {tail_bound}");
        let Construction::Series { term_norms: longer, .. } = &k40.construction else {
            unreachable!()
        };
        let term_sum: f64 = longer[19..].iter().sum();
        assert!(diff <= term_sum * (1.0 + 1e-12));
        assert!(term_norms.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn term_norms_decay_algebraically() {
        let k = k_series(&half(240), 0.5, 60).unwrap();
        let Construction::Series { term_norms, .. } = &k.construction else { unreachable!() };
        // Same-parity ratios tend to 1 (algebraic decay), not to 1/4.
        let ratios: Vec<f64> = term_norms.windows(3).map(|w| w[2] / w[0]).collect();
        assert!(ratios[40..].iter().all(|&q| q > 0.85 && q < 1.0), "{ratios:?}");
    }

    #[test]
    fn tail_bound_shrinks() {
        let b20 = series_tail_bound(0.5, 20);
        let b40 = series_tail_bound(0.5, 40);
        assert!(b40 < b20 && b20.is_finite());
        assert_eq!(series_tail_bound(-0.5, 20), f64::INFINITY);
        assert_eq!(series_tail_bound(3.0, 3), 0.0);
    }

    #[test]
    fn series_rejects_short_box() {
        assert!(matches!(k_series(&half(32), 0.5, 20), Err(LabError::WindowOverflow(_))));
    }

    #[test]
    fn assembled_2d_laplacian() {
        let lat = LatticeBox::new(&[10, 10], BoxKind::Half).unwrap();
        let order = FracOrder::new(&[1.0, 1.0]).unwrap();
        let a = assemble_nd(&order, &lat, PowerMethod::Spectral).unwrap();
        assert!(a.max_abs_diff(&crate::lattice::laplacian(&lat)) < 1e-12);
    }

    #[test]
    fn assembled_spectrum_is_outer_sum() {
        let lat = LatticeBox::new(&[7, 9], BoxKind::Half).unwrap();
        let order = FracOrder::new(&[0.5, 1.5]).unwrap();
        let a = assemble_nd(&order, &lat, PowerMethod::Spectral).unwrap();
        let eig = crate::lattice::EigenSystem::new(&a).unwrap();
        // Oracle: Dirichlet eigenvalues 2 - 2cos(pi k / (L + 1)) per axis.
        let axis = |l: usize, r: f64| -> Vec<f64> {
            (1..=l).map(|k| (2.0 - 2.0 * (PI * k as f64 / (l + 1) as f64).cos()).powf(r)).collect()
        };
        let mut sums = Vec::new();
        for x in axis(7, 0.5) {
            for y in axis(9, 1.5) {
                sums.push(x + y);
            }
        }
        sums.sort_by(f64::total_cmp);
        for (a, b) in eig.values().iter().zip(&sums) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(*eig.values().last().unwrap() <= order.lambda_max() + 1e-10);
    }

    #[test]
    fn separable_corrections_have_no_face_residual() {
        let lat = LatticeBox::new(&[6, 5], BoxKind::Half).unwrap();
        let order = FracOrder::new(&[0.5, 0.5]).unwrap();
        let nd = k_nd(&order, &lat, 4).unwrap();
        assert!(nd.residual < 1e-12);
    }

    #[test]
    fn rank_one_compactness() {
        let k = k_series(&half(32), 2.0, 4).unwrap();
        let rep = compactness_report(&k.matrix, &[1.0], 1, &[0, 4, 8]);
        assert!((rep.singular_values[0] - 1.0).abs() < 1e-14);
        assert!(rep.singular_values[1..].iter().all(|&s| s < 1e-14));
        assert!(rep.hs_tails.iter().all(|&(_, t)| t == 0.0));
        assert_eq!(rep.outside_collar, 0.0);
    }

    #[test]
    fn hs_tails_decrease_and_weights_decay_in_s() {
        let d = k_definitional(0.5, SectionWindow::new(32, 512).unwrap()).unwrap();
        let rep = compactness_report(&d.matrix, &[], 32, &[0, 2, 4, 8, 16, 31]);
        assert!(rep.hs_tails.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(rep.hs_tails.last().unwrap().1, 0.0);

        let lat = LatticeBox::new(&[8, 8], BoxKind::Half).unwrap();
        let nd = k_nd(&FracOrder::new(&[0.5, 0.5]).unwrap(), &lat, 4).unwrap();
        let rep = compactness_report(&nd.definitional, &[0.6, 1.0, 2.0], 4, &[]);
        let norms: Vec<f64> = rep.weighted_hs.iter().map(|w| w.1).collect();
        assert!(norms.iter().all(|n| n.is_finite() && *n > 0.0));
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        // Oracle: the same norm summed entry by entry.
        let w = tangential_weight(&lat, 1.0, 4);
        let mut direct = 0.0;
        for (a, wa) in w.iter().enumerate() {
            for b in 0..lat.size() {
                direct += (wa * nd.definitional.re()[(a, b)]).powi(2);
            }
        }
        assert!((direct.sqrt() - norms[1]).abs() < 1e-12 * norms[1]);
    }
}
