//! Fractional powers, walk-deficit combinatorics and the boundary correction.

mod boundary;
mod coeff;
mod order;
mod power;
mod walk;

pub use boundary::{
    assemble_nd, compactness_report, d_h_norm, k_definitional, k_nd, k_series, measure_collar, outside_collar,
    series_coefficients, series_tail_bound, tangential_weight, BoundaryCorrection, CompactnessReport, Construction,
    NdCorrection, SectionWindow, COLLAR_TOL,
};
pub use coeff::{binomial, gen_binomials, CoeffTable};
pub use order::{axis_symbol, symbol, symbol_grid, thresholds, torus_grid, FracOrder, SymbolGrid, ThresholdSet};
pub use power::{
    circulant_function, frac_power, kronecker_sum, reflection_ring, ring_kernel, FracPower, PowerMethod, RingKernel,
};
pub use walk::{d_h, walk_deficit, IntMatrix, WalkMethod};
