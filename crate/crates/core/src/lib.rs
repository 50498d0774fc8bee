//! Analysis and simulation toolkit for the augmented Born-Infeld (ABI) system
//! linearized around a constant state.
//!
//! The crate is organised the way the computation flows:
//!
//! - [`model`]: background states, the anisotropic frequency metric, the
//!   Born-Infeld to ABI lift and admissible initial data.
//! - [`spectral`]: the linear symbol `A0(xi)`, its eigenbases and projectors,
//!   the constraint operator `L0(xi)` and their action on grid fields.
//! - [`resonance`]: phase functions, resonant sets, the wave-symbol identities
//!   and the angular cutoffs.
//! - [`symbolic`]: exact integer polynomial replay of the non-resonance
//!   certificate.
//! - [`sim`]: the pseudo-spectral RK4 solver and its diagnostics.

pub mod error;
pub mod fft;
pub mod grid;
pub mod model;
pub mod quasilinear;
pub mod resonance;
pub mod sim;
pub mod spectral;
pub mod symbolic;

pub use error::{AbiError, Result};
pub use grid::{Grid, SpectralField, StateField};
pub use model::{ConstantState, Metric0};

/// Number of scalar unknowns `(tau, v, b, d)`.
pub const NCOMP: usize = 10;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat10 = nalgebra::SMatrix<f64, 10, 10>;
