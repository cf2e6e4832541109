//! Natural units (hbar = c = 1) with the electronvolt as the only base unit.
//!
//! Lengths and times live in eV^-1 internally. Everything in this module is
//! meant to be called at I/O boundaries only.

use serde::{Deserialize, Serialize};

/// hbar*c in eV*m (197.3269804 MeV fm).
pub const HBAR_C_EV_M: f64 = 197.326_980_4e6 * 1e-15;
/// hbar in eV*s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV_PER_K: f64 = 8.617_333_262e-5;
/// Elementary charge, J per eV.
pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    /// eV; SI counterpart is the joule.
    Energy,
    /// eV^-1 read as a length; SI counterpart is the metre.
    Length,
    /// eV^-1 read as a time; SI counterpart is the second.
    Time,
    Dimensionless,
}

/// A magnitude in natural units tagged with how it maps onto SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitValue {
    pub magnitude: f64,
    pub dimension: Dimension,
}

impl UnitValue {
    pub fn new(magnitude: f64, dimension: Dimension) -> Self {
        Self { magnitude, dimension }
    }

    pub fn energy_ev(ev: f64) -> Self {
        Self::new(ev, Dimension::Energy)
    }

    pub fn from_si(value: f64, dimension: Dimension) -> Self {
        let magnitude = match dimension {
            Dimension::Energy => value / JOULE_PER_EV,
            Dimension::Length => metres_to_natural(value),
            Dimension::Time => seconds_to_natural(value),
            Dimension::Dimensionless => value,
        };
        Self { magnitude, dimension }
    }

    pub fn to_si(&self) -> f64 {
        match self.dimension {
            Dimension::Energy => self.magnitude * JOULE_PER_EV,
            Dimension::Length => natural_to_metres(self.magnitude),
            Dimension::Time => natural_to_seconds(self.magnitude),
            Dimension::Dimensionless => self.magnitude,
        }
    }
}

pub fn metres_to_natural(m: f64) -> f64 {
    m / HBAR_C_EV_M
}

pub fn natural_to_metres(inv_ev: f64) -> f64 {
    inv_ev * HBAR_C_EV_M
}

pub fn seconds_to_natural(s: f64) -> f64 {
    s / HBAR_EV_S
}

pub fn natural_to_seconds(inv_ev: f64) -> f64 {
    inv_ev * HBAR_EV_S
}

pub fn kelvin_to_ev(k: f64) -> f64 {
    k * BOLTZMANN_EV_PER_K
}
