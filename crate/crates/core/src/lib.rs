//! Fractional discrete Laplacians on the lattice `Z^d` and the half-lattice
//! `N^d`, studied through dense finite sections.
//!
//! The crate is organised bottom-up: [`lattice`] provides boxes, operators and
//! spectral calculus; [`fractional`] builds `Delta^r` and its boundary
//! correction; [`heat`] handles the `r = 1` heat kernels; [`mourre`] and
//! [`spectral`] run the commutator and resolvent experiments.

pub mod error;
pub mod fractional;
pub mod heat;
pub mod lattice;
pub mod mourre;
pub mod spectral;

pub use error::{LabError, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
