//! Resolvent, propagation and counting experiments on finite sections.

mod ballistic;
mod eigcount;
mod lap;
mod propagation;
mod rscan;
mod weyl;

pub use ballistic::{ballistic_diagnostic, BallisticCell, BallisticFit, BallisticReport};
pub use eigcount::{eig_window_count, OutlierReport, OutlierRung, ISOLATION_FACTOR, PERSISTENCE_TOL};
pub use lap::{
    eta_decade, lap_probe, lap_rung, local_spacing, weighted_resolvent_norm, LapProbeResult, LapRung, PLATEAU_DRIFT,
    SPACING_FACTOR,
};
pub use propagation::{evolve, propagation_integral, PropagationResult, PHASE_STEP};
pub use rscan::{exponent_path, power_resolvent, r_scan, symbol_resolvent_bound, RScanReport, RScanRow};
pub use weyl::{compressed_power, ks_distance, resolvent_at_i, weyl_compare, WeylReport, WeylRung, RANK_TOL};
