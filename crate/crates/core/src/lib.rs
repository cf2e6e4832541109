//! Detection probabilities for oscillating particles computed from
//! time-of-arrival measurement models, together with the wavelength and
//! event-distribution comparisons against the standard oscillation formula.
//!
//! Every quantity is in natural units (hbar = c = 1) with energies in eV.
//! See [`units`] for conversions at the I/O boundary.

pub mod amplitudes;
pub mod analysis;
pub mod benchmark;
pub mod error;
pub mod flags;
pub mod kernels;
pub mod meas_models;
pub mod oscillation;
pub mod quad;
pub mod types;
pub mod units;

pub use amplitudes::AmplitudeModel;
pub use error::{Error, Result};
pub use flags::RegimeFlag;
pub use types::{
    kinematics, validate_mixing_matrix, DetectionChannel, Eigenstate, Kinematics, MassSpectrum,
    MixingMatrix, PlaneRotation, WavePacketState,
};
