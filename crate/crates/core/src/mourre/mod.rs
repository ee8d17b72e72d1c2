//! Conjugate operators, commutators and Mourre estimates at truncation scale.

mod commutator;
mod conjugate;
mod dyadic;
mod multiplier;
mod potential;
mod report;
mod window;

pub use commutator::{circulant_commutator, form_commutator};
pub use conjugate::{build_conjugate, ConjugateOp, Flavor};
pub use dyadic::{dyadic_bump, dyadic_c01_diagnostic, dyadic_ladder_converges, DyadicReport};
pub use multiplier::{
    displayed_double_multiplier, first_multiplier, multiplier_check, MultiplierReport, MultiplierRung,
    MultiplierTable, Polynomial, SUPPORT_TOL,
};
pub use potential::{check_potential, PotentialCheck, PotentialFamily, PotentialGrid, H1_GROWTH};
pub use report::{
    compress_to_window, mourre_report, mourre_rung, MourreReport, MourreRung, MAX_DEFECTS, MAX_DEFECT_SKIP,
};
pub use window::{smooth_cutoff, smooth_step, Bump, SpectralWindow, DEFAULT_PLATEAU};
