//! Detector kernels: the temporal-resolution Gaussian G1, the product-particle
//! smearing G2, and their product F.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flags::RegimeFlag;
use crate::types::DetectionChannel;

/// Below this value of M * delta the saddle-point form of G2 is flagged.
pub const SADDLE_POINT_MIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub tau_dec: f64,
    pub product_masses: Vec<f64>,
    pub delta: f64,
}

impl KernelSpec {
    pub fn new(tau_dec: f64, product_masses: Vec<f64>, delta: f64) -> Result<Self> {
        if !(tau_dec > 0.0 && tau_dec.is_finite()) {
            return Err(Error::InvalidInput(format!("tau_dec = {tau_dec} must be > 0")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta = {delta} must be > 0")));
        }
        if product_masses.is_empty() || product_masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidInput("product masses must be non-empty and > 0".into()));
        }
        Ok(Self { tau_dec, product_masses, delta })
    }

    pub fn from_channel(ch: &DetectionChannel) -> Self {
        Self { tau_dec: ch.tau_dec, product_masses: ch.product_masses.clone(), delta: ch.delta }
    }

    pub fn min_mass(&self) -> f64 {
        self.product_masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// M_min * delta^2
    pub fn tau_sup(&self) -> f64 {
        self.min_mass() * self.delta * self.delta
    }

    pub fn saddle_point_valid(&self) -> bool {
        self.min_mass() * self.delta >= SADDLE_POINT_MIN
    }

    pub fn flags(&self) -> Vec<RegimeFlag> {
        if self.saddle_point_valid() {
            Vec::new()
        } else {
            vec![RegimeFlag::SaddlePoint { min_m_delta: self.min_mass() * self.delta }]
        }
    }
}

/// exp(-s^2 / (8 tau^2))
pub fn g1(s: f64, tau_dec: f64) -> f64 {
    (-s * s / (8.0 * tau_dec * tau_dec)).exp()
}

/// Product over product particles of (M / (2 pi i (s - i M delta^2 / 2)))^{3/2}.
///
/// The base 2 pi i s + pi M delta^2 has positive real part, so the principal
/// power is continuous in s and G2(0) = prod (1 / (pi delta^2))^{3/2} > 0.
pub fn g2(s: f64, spec: &KernelSpec) -> Complex64 {
    let d2 = spec.delta * spec.delta;
    spec.product_masses.iter().fold(Complex64::new(1.0, 0.0), |acc, &m| {
        let base = Complex64::new(PI * m * d2, 2.0 * PI * s);
        acc * (Complex64::new(m, 0.0) / base).powf(1.5)
    })
}

/// F(s) = G1(s) G2(s)
pub fn f_kernel(s: f64, spec: &KernelSpec, tau_dec: f64) -> Complex64 {
    g2(s, spec) * g1(s, tau_dec)
}
