//! Warnings raised when an input leaves the regime an approximation assumes.
//! The computation still completes; the flag travels with the result.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegimeFlag {
    /// Some product particle has M * delta below 10.
    SaddlePoint { min_m_delta: f64 },
    /// Baseline is not much longer than the packet width.
    ShortBaseline { l_over_sigma: f64 },
    /// Arrival-time separation is not small against the kernel timescales.
    ScaleSeparation { ratio: f64 },
    /// Wave-packet spreading over the flight time is not negligible.
    Dispersion { parameter: f64 },
    /// Momentum packets overlap (a |p1 - p2| not large).
    PacketOverlap { width_times_gap: f64 },
    /// Mixed-state phase spread exceeds 0.3 rad.
    PhaseSpread { pair: (usize, usize), bound: f64 },
    /// Sampling window is not narrow compared with the grid scale.
    WideSmearing { relative_width: f64 },
    /// The kernel cutoff is comparable to the decay length of the amplitude.
    DecayCutoff { ratio: f64 },
}

impl fmt::Display for RegimeFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeFlag::SaddlePoint { min_m_delta } => {
                write!(f, "saddle-point: min M*delta = {min_m_delta:.3e} < 10")
            }
            RegimeFlag::ShortBaseline { l_over_sigma } => {
                write!(f, "short-baseline: L/sigma = {l_over_sigma:.3e} < 100")
            }
            RegimeFlag::ScaleSeparation { ratio } => {
                write!(f, "scale-separation: dt/min(tau) = {ratio:.3e}")
            }
            RegimeFlag::Dispersion { parameter } => {
                write!(f, "dispersion: mu*t/sigma^2 = {parameter:.3e}")
            }
            RegimeFlag::PacketOverlap { width_times_gap } => {
                write!(f, "packet-overlap: a*|p1 - p2| = {width_times_gap:.3e}")
            }
            RegimeFlag::PhaseSpread { pair, bound } => {
                write!(f, "phase-spread: pair ({}, {}) spread bound {bound:.3e} rad", pair.0, pair.1)
            }
            RegimeFlag::WideSmearing { relative_width } => {
                write!(f, "wide-smearing: relative width {relative_width:.3e}")
            }
            RegimeFlag::DecayCutoff { ratio } => {
                write!(f, "decay-cutoff: xi cutoff / decay time = {ratio:.3e}")
            }
        }
    }
}

pub(crate) fn push_unique(flags: &mut Vec<RegimeFlag>, flag: RegimeFlag) {
    if !flags.contains(&flag) {
        flags.push(flag);
    }
}
