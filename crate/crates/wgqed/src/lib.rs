//! Time-dependent wave-function ansatz for the light emitted by one or N
//! two-level emitters coupled to a one-dimensional waveguide.
//!
//! All times are dimensionless, ζ = Γt, and all rates and frequencies are in
//! units of the total decay rate Γ. The group velocity is set to 1, so
//! correlation functions are reported per unit v_g.
//!
//! The state is truncated at two excitations: the emitter sector, one emitted
//! photon (with the emitters in any single-excitation state) and two emitted
//! photons with the emitters in the ground state.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod chain;
pub mod correlations;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod filter;
pub mod grid;
pub mod oracle;
pub mod params;

pub use amplitudes::{PhotonAmplitudeSet, Triangle, TwoPhotonAmplitude, TwoPhotonSelection};
pub use drive::{DriveEnvelope, DriveKind, Geometry};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use params::{ChainParams, Channel, SystemParams};

pub use num_complex::Complex64 as C64;
