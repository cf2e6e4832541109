//! Flavor amplitudes A_alpha(t, x) of a one-dimensional Gaussian wave-packet
//! superposition.
//!
//! Each mass branch is psi_i(t, x) = (4 pi sigma^2)^{1/4} int dp/(2 pi)
//! exp(-sigma^2 (p - p_i)^2 / 2 + i p (x - c) - i E_i(p) t - Gamma_i t), where
//! c is the packet centre. The amplitude is sum_i U*_{beta i} U_{alpha i} psi_i.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::types::{MixingMatrix, WavePacketState};

/// Half-width of the momentum window, in units of 1/sigma.
pub const MOMENTUM_WINDOW: f64 = 8.0;

#[derive(Debug, Clone, Copy)]
pub struct AmplitudeRequest<'a> {
    pub state: &'a WavePacketState,
    pub mixing: &'a MixingMatrix,
    pub detection_flavor: usize,
    pub production_flavor: usize,
    pub t: f64,
    pub x: f64,
}

impl<'a> AmplitudeRequest<'a> {
    /// Request using the state's own production flavor.
    pub fn new(
        state: &'a WavePacketState,
        mixing: &'a MixingMatrix,
        detection_flavor: usize,
        t: f64,
        x: f64,
    ) -> Result<Self> {
        let req = Self { state, mixing, detection_flavor, production_flavor: state.production_flavor, t, x };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mixing.dim();
        if n != self.state.n_states() {
            return Err(Error::InvalidInput(format!(
                "mixing matrix is {n}x{n} but the spectrum has {} states",
                self.state.n_states()
            )));
        }
        for (name, f) in [("detection", self.detection_flavor), ("production", self.production_flavor)] {
            if f >= n {
                return Err(Error::InvalidInput(format!("{name} flavor {f} out of range 0..{n}")));
            }
        }
        if !(self.state.sigma > 0.0) {
            return Err(Error::InvalidInput("sigma must be > 0".into()));
        }
        if !(self.t.is_finite() && self.x.is_finite()) {
            return Err(Error::InvalidInput("t and x must be finite".into()));
        }
        Ok(())
    }

    fn weight(&self, i: usize) -> Complex64 {
        self.mixing.branch_weight(self.production_flavor, self.detection_flavor, i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeModel {
    MomentumIntegral,
    NoDispersion,
    Dispersive,
}

impl AmplitudeModel {
    pub fn branch(self, state: &WavePacketState, i: usize, t: f64, x: f64) -> Result<Complex64> {
        match self {
            AmplitudeModel::MomentumIntegral => branch_momentum_integral(state, i, t, x),
            AmplitudeModel::NoDispersion => Ok(branch_no_dispersion(state, i, t, x)),
            AmplitudeModel::Dispersive => Ok(branch_dispersive(state, i, t, x)),
        }
    }

    pub fn amplitude(self, req: &AmplitudeRequest<'_>) -> Result<Complex64> {
        req.validate()?;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..req.state.n_states() {
            let w = req.weight(i);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            sum += w * self.branch(req.state, i, req.t, req.x)?;
        }
        Ok(sum)
    }
}

/// Branch i by direct quadrature over p in p_i +- 8/sigma with the exact
/// E_i(p) and a constant decay rate.
pub fn branch_momentum_integral(state: &WavePacketState, i: usize, t: f64, x: f64) -> Result<Complex64> {
    let e = state.spectrum.eigenstate(i);
    let k = state.spectrum.kinematics(i);
    let sigma = state.sigma;
    let x = x - state.center;
    let (m, p0, e0) = (e.mass, e.momentum, k.energy);
    let drift = x - k.velocity * t;
    // Phase relative to the carrier p_i x - E_i t. The energy remainder
    // E(p) - E_i - v_i q is written without cancellation.
    let integrand = |p: f64| {
        let q = p - p0;
        let energy = m.hypot(p);
        let remainder = if p > 0.0 {
            q * q * m * m * (p + p0) / ((e0 * p + p0 * energy) * e0 * (energy + e0))
        } else {
            energy - e0 - k.velocity * q
        };
        Complex64::from_polar((-0.5 * sigma * sigma * q * q).exp(), q * drift - remainder * t)
    };
    let half = MOMENTUM_WINDOW / sigma;
    // Enough initial panels to resolve the phase across the window.
    let swing = drift.abs() * half + 0.5 * k.mu * t.abs() * half * half;
    let panels = ((swing / PI).ceil() as usize).clamp(8, 4096);
    let opts = QuadOptions::relative(1e-10).with_panels(panels).with_max_intervals(panels * 64);
    let est = integrate(integrand, p0 - half, p0 + half, &opts)?;
    let norm = (4.0 * PI * sigma * sigma).powf(0.25) / (2.0 * PI);
    let carrier = Complex64::from_polar(norm * (-e.decay_rate * t).exp(), p0 * x - e0 * t);
    Ok(est.value * carrier)
}

/// Linearized energy: (pi sigma^2)^{-1/4} exp(-(x - v t)^2 / (2 sigma^2) + i p x - i E t - Gamma t).
pub fn branch_no_dispersion(state: &WavePacketState, i: usize, t: f64, x: f64) -> Complex64 {
    let e = state.spectrum.eigenstate(i);
    let k = state.spectrum.kinematics(i);
    let sigma = state.sigma;
    let x = x - state.center;
    let d = x - k.velocity * t;
    let modulus = (PI * sigma * sigma).powf(-0.25) * (-d * d / (2.0 * sigma * sigma) - e.decay_rate * t).exp();
    Complex64::from_polar(modulus, e.momentum * x - k.energy * t)
}

/// Energy to second order (curvature mu_i) and decay rate to first order
/// (slope Delta_i) in p - p_i. With A = sigma^2 + i mu t and
/// B = i (x - v t) - Delta t the branch is
/// (sigma^2/pi)^{1/4} A^{-1/2} exp(B^2 / (2A) + i (p x - E t) - Gamma t).
pub fn branch_dispersive(state: &WavePacketState, i: usize, t: f64, x: f64) -> Complex64 {
    let e = state.spectrum.eigenstate(i);
    let k = state.spectrum.kinematics(i);
    let sigma = state.sigma;
    let x = x - state.center;
    let a = Complex64::new(sigma * sigma, k.mu * t);
    let b = Complex64::new(-e.decay_slope * t, x - k.velocity * t);
    let exponent = b * b / (a * 2.0) + Complex64::new(-e.decay_rate * t, e.momentum * x - k.energy * t);
    (sigma * sigma / PI).powf(0.25) * exponent.exp() / a.sqrt()
}

pub fn amplitude_momentum_integral(req: &AmplitudeRequest<'_>) -> Result<Complex64> {
    AmplitudeModel::MomentumIntegral.amplitude(req)
}

pub fn amplitude_no_dispersion(req: &AmplitudeRequest<'_>) -> Result<Complex64> {
    AmplitudeModel::NoDispersion.amplitude(req)
}

pub fn amplitude_dispersive(req: &AmplitudeRequest<'_>) -> Result<Complex64> {
    AmplitudeModel::Dispersive.amplitude(req)
}

/// mu_i t / sigma^2: the dimensionless spreading of branch i after time t.
pub fn dispersion_parameter(state: &WavePacketState, i: usize, t: f64) -> f64 {
    state.spectrum.kinematics(i).mu * t.abs() / (state.sigma * state.sigma)
}

/// Branch i with its kinematics resolved once, for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BranchEvaluator {
    model: AmplitudeModel,
    sigma: f64,
    center: f64,
    prefactor: f64,
    momentum: f64,
    energy: f64,
    velocity: f64,
    mu: f64,
    decay_rate: f64,
    decay_slope: f64,
}

impl BranchEvaluator {
    pub(crate) fn new(state: &WavePacketState, i: usize, model: AmplitudeModel) -> Self {
        let e = state.spectrum.eigenstate(i);
        let k = state.spectrum.kinematics(i);
        let sigma = state.sigma;
        let prefactor = match model {
            AmplitudeModel::Dispersive => (sigma * sigma / PI).powf(0.25),
            _ => (PI * sigma * sigma).powf(-0.25),
        };
        Self {
            model,
            sigma,
            center: state.center,
            prefactor,
            momentum: e.momentum,
            energy: k.energy,
            velocity: k.velocity,
            mu: k.mu,
            decay_rate: e.decay_rate,
            decay_slope: e.decay_slope,
        }
    }

    /// Spatial envelope width after time t.
    pub(crate) fn width(&self, t: f64) -> f64 {
        match self.model {
            AmplitudeModel::NoDispersion => self.sigma,
            _ => self.sigma * (1.0 + (self.mu * t / (self.sigma * self.sigma)).powi(2)).sqrt(),
        }
    }

    pub(crate) fn velocity(&self) -> f64 {
        self.velocity
    }

    pub(crate) fn energy(&self) -> f64 {
        self.energy
    }

    /// Evaluates the branch; the momentum-integral model needs the full
    /// state and is left to the caller.
    pub(crate) fn eval(&self, t: f64, x: f64) -> Complex64 {
        let x = x - self.center;
        let carrier = self.momentum * x - self.energy * t;
        match self.model {
            AmplitudeModel::Dispersive => {
                let a = Complex64::new(self.sigma * self.sigma, self.mu * t);
                let b = Complex64::new(-self.decay_slope * t, x - self.velocity * t);
                let exponent = b * b / (a * 2.0) + Complex64::new(-self.decay_rate * t, carrier);
                self.prefactor * exponent.exp() / a.sqrt()
            }
            _ => {
                let d = x - self.velocity * t;
                let modulus =
                    self.prefactor * (-d * d / (2.0 * self.sigma * self.sigma) - self.decay_rate * t).exp();
                Complex64::from_polar(modulus, carrier)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MassSpectrum;

    fn state(masses: &[f64], p: f64, sigma: f64) -> WavePacketState {
        WavePacketState::new(sigma, 0, MassSpectrum::equal_momentum(masses, p).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_integral_at_origin() {
        let st = state(&[0.5], 2.0, 1.3);
        let u = MixingMatrix::identity(1);
        let req = AmplitudeRequest::new(&st, &u, 0, 0.0, 0.0).unwrap();
        let v = amplitude_momentum_integral(&req).unwrap();
        // (4 pi s^2)^{1/4} / (2 pi) * sqrt(2 pi / s^2) = (pi s^2)^{-1/4}
        let expected = (PI * 1.3f64 * 1.3).powf(-0.25);
        assert!((v - expected).norm() < 1e-9 * expected);
    }

    #[test]
    fn identity_mixing_has_no_transitions() {
        let st = state(&[0.1, 0.2], 5.0, 2.0);
        let u = MixingMatrix::identity(2);
        let req = AmplitudeRequest::new(&st, &u, 1, 3.0, 2.5).unwrap();
        for model in [AmplitudeModel::MomentumIntegral, AmplitudeModel::NoDispersion, AmplitudeModel::Dispersive] {
            assert_eq!(model.amplitude(&req).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn envelope_rides_classical_path() {
        let st = state(&[3.0], 4.0, 1.7);
        let t = 12.0;
        let v = branch_no_dispersion(&st, 0, t, 0.8 * t);
        assert!((v.norm() - (PI * 1.7f64 * 1.7).powf(-0.25)).abs() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_reduces_to_kronecker_delta() {
        let st = state(&[0.4, 0.4], 3.0, 2.0);
        let u = MixingMatrix::rotation(0.6);
        let t = 7.0;
        let x = 6.0;
        let a = |alpha: usize| amplitude_no_dispersion(&AmplitudeRequest::new(&st, &u, alpha, t, x).unwrap()).unwrap();
        let single = branch_no_dispersion(&st, 0, t, x);
        assert!((a(0).norm() - single.norm()).abs() < 1e-14);
        assert!(a(1).norm() < 1e-15);
    }

    #[test]
    fn linearized_amplitude_matches_quadrature() {
        // E about 10 times a unit threshold, sigma^2 >> mu t.
        let st = state(&[3.0, 3.2], 10.0, 60.0);
        let u = MixingMatrix::rotation(PI / 6.0);
        let t = 200.0;
        let v = st.spectrum.kinematics(0).velocity;
        assert!(dispersion_parameter(&st, 1, t) < 1e-3);
        for k in -4..=4 {
            let x = v * t + 25.0 * k as f64;
            let req = AmplitudeRequest::new(&st, &u, 1, t, x).unwrap();
            let a = amplitude_momentum_integral(&req).unwrap();
            let b = amplitude_no_dispersion(&req).unwrap();
            assert!((a - b).norm() < 1e-3 * a.norm(), "x = {x}");
        }
    }

    #[test]
    fn dispersive_reduces_without_curvature() {
        let st = state(&[0.0, 0.0], 5.0, 2.0);
        let u = MixingMatrix::rotation(0.3);
        let req = AmplitudeRequest::new(&st, &u, 0, 40.0, 39.0).unwrap();
        let a = amplitude_dispersive(&req).unwrap();
        let b = amplitude_no_dispersion(&req).unwrap();
        assert!((a - b).norm() < 1e-12 * b.norm());
    }

    #[test]
    fn weak_dispersion_changes_peak_little() {
        let mut st = state(&[2.0], 4.0, 5.0);
        let k = st.spectrum.kinematics(0);
        // choose t so that mu t / sigma^2 = 0.01
        let t = 0.01 * st.sigma * st.sigma / k.mu;
        let x = k.velocity * t;
        let a = branch_dispersive(&st, 0, t, x).norm_sqr();
        let b = branch_no_dispersion(&st, 0, t, x).norm_sqr();
        assert!((a - b).abs() / b < 0.02);
        st.center = 0.0;
    }

    #[test]
    fn moderate_dispersion_matches_quadrature() {
        let st = state(&[2.0], 40.0, 5.0);
        let k = st.spectrum.kinematics(0);
        let t = 0.3 * st.sigma * st.sigma / k.mu;
        let width = st.sigma * (1.0 + 0.09f64).sqrt();
        for j in -3..=3 {
            let x = k.velocity * t + 0.5 * width * j as f64;
            let a = branch_momentum_integral(&st, 0, t, x).unwrap();
            let b = branch_dispersive(&st, 0, t, x);
            assert!((a - b).norm() < 0.05 * a.norm(), "x offset {j}");
        }
    }

    #[test]
    fn decay_slope_shifts_envelope() {
        let base = state(&[1.0], 3.0, 2.0);
        let spec = base.spectrum.clone().with_decay_rates(&[0.01]).unwrap().with_decay_slopes(&[0.002]).unwrap();
        let st = WavePacketState::new(2.0, 0, spec).unwrap();
        let t = 50.0;
        let x = st.spectrum.kinematics(0).velocity * t;
        let a = branch_dispersive(&st, 0, t, x).norm();
        let b = branch_no_dispersion(&st, 0, t, x).norm();
        assert!(a.is_finite() && b > 0.0);
        assert!((a / b - 1.0).abs() < 0.2);
    }

    #[test]
    fn unitarity_sum_rule_at_origin() {
        let spec = MassSpectrum::equal_momentum(&[0.1, 0.2, 0.3], 2.0).unwrap();
        let st = WavePacketState::new(1.5, 1, spec).unwrap();
        let u = MixingMatrix::pmns(0.59, 0.15, 0.84, 1.2);
        let total: f64 = (0..3)
            .map(|a| amplitude_no_dispersion(&AmplitudeRequest::new(&st, &u, a, 0.0, 0.0).unwrap()).unwrap().norm_sqr())
            .sum();
        assert!((total - (PI * 1.5f64 * 1.5).powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn free_evolution_conserves_norm() {
        let st = state(&[1.5], 9.0, 1.0);
        let k = st.spectrum.kinematics(0);
        let norm_at = |t: f64| {
            let c = k.velocity * t;
            let w = 14.0 * st.sigma * (1.0 + (k.mu * t / st.sigma.powi(2)).powi(2)).sqrt();
            integrate(
                |x: f64| branch_momentum_integral(&st, 0, t, x).unwrap().norm_sqr(),
                c - w,
                c + w,
                &QuadOptions::relative(1e-9).with_panels(8),
            )
            .unwrap()
            .value
        };
        let n0 = norm_at(0.0);
        assert!((n0 - 1.0).abs() < 1e-6);
        for t in [5.0, 100.0] {
            let n = norm_at(t);
            assert!((n - n0).abs() < 1e-6, "t = {t}: {n} vs {n0}");
        }
    }

    #[test]
    fn translation_shifts_density() {
        let st = state(&[0.3, 0.7], 2.0, 1.2);
        let shifted = st.clone().centered_at(-4.5);
        let u = MixingMatrix::rotation(0.4);
        let t = 9.0;
        for j in 0..20 {
            let x = j as f64 * 0.7 - 3.0;
            let a = amplitude_no_dispersion(&AmplitudeRequest::new(&shifted, &u, 1, t, x).unwrap()).unwrap();
            let b = amplitude_no_dispersion(&AmplitudeRequest::new(&st, &u, 1, t, x + 4.5).unwrap()).unwrap();
            assert!((a.norm_sqr() - b.norm_sqr()).abs() <= 1e-14 * b.norm_sqr().max(1e-300));
        }
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let st = state(&[0.3, 0.7], 2.0, 1.2);
        let u = MixingMatrix::identity(3);
        assert!(AmplitudeRequest::new(&st, &u, 0, 0.0, 0.0).is_err());
        let u = MixingMatrix::identity(2);
        assert!(AmplitudeRequest::new(&st, &u, 2, 0.0, 0.0).is_err());
    }
}
