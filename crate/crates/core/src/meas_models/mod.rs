//! Reference quantum-measurement models: Kijowski's time-of-arrival POVM,
//! the von Neumann pointer model and detector timescale estimates.

mod kijowski;
mod pointer;
mod timescales;

pub use kijowski::{
    kijowski_pdf, kijowski_total, no_detection_probability, two_packet_arrival_pdf, MomentumWavefunction,
    TwoPacketSpec, NORM_TOLERANCE,
};
pub use pointer::{gaussian_pointer, von_neumann_pointer_prob, PointerModel, MAX_POINTER_DIM};
pub use timescales::{decoherence_timescales, Timescales};
