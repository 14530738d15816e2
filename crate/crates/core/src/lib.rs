//! Simulator for nonidentical three-level quantum dots sharing one lossy
//! waveguide mode.
//!
//! Three model tiers are provided: the full dot–waveguide interaction, the
//! dispersive tier with the excited levels eliminated (`Eff1`), and the
//! diagonal tier with the waveguide eliminated as well (`Eff`). On top of
//! them sit controlled-phase gate planning, graph/cluster-state schedules, and
//! decoherence studies driven by waveguide loss.

pub mod entangle;
pub mod error;
pub mod evolve;
pub mod gates;
pub mod model;
pub mod ops;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
