//! Design and verification of trap-deformation protocols that map the states
//! of a biased double well onto Fock states of a harmonic trap.
//!
//! - [`model`]: the quartic potential family, double-well geometry, bias design.
//! - [`spectral`]: instantaneous eigenstates and dH/dλ couplings.
//! - [`schedule`]: FAQUAD, local-adiabatic and linear time courses A(t).
//! - [`dynamics`]: split-operator propagation and fidelities.
//! - [`experiments`]: presets, fidelity scans, CSV output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod grid;
pub mod model;
pub mod spectral;
pub mod schedule;
pub mod units;

pub use error::{Error, Result};
pub use grid::SpatialGrid;
pub use model::{DeformationPath, Geometry, PotentialParams, WellGeometry};
pub use spectral::{eigensolve, EigenSet, NeighborCoupling};
pub use units::UnitSystem;
