use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    arrival_time, branch_weights, check_inputs, decay_factor, max_separation, oscillation_wavenumber, regime_flags,
    ExperimentGeometry, OscillationResult, PairTerm, SEPARATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::kernels::{f_kernel, KernelSpec};
use crate::quad::{integrate, QuadOptions};
use crate::types::{DetectionChannel, MixingMatrix, WavePacketState};

/// Half-width of the xi window around each pair's arrival-time offset, in
/// units of sigma (1/v_i + 1/v_j).
const XI_WINDOW: f64 = 14.0;

/// Largest number of initial panels before the xi oscillation is declared
/// unresolvable.
const MAX_PANELS: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedMode {
    /// Exact Gaussian time integrals; one quadrature over xi per pair.
    General,
    /// Timescale-separated limit with all constants absorbed into K' = 1.
    Simplified,
}

/// Closed-form probability density. Simplified mode refuses inputs outside
/// the timescale-separated regime with `RegimeViolation`.
pub fn detection_probability_closed(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    mode: ClosedMode,
) -> Result<OscillationResult> {
    closed(state, mixing, channel, geom, mode, true)
}

/// As [`detection_probability_closed`], but a regime violation only raises a
/// flag.
pub fn detection_probability_closed_unchecked(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    mode: ClosedMode,
) -> Result<OscillationResult> {
    closed(state, mixing, channel, geom, mode, false)
}

fn closed(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    mode: ClosedMode,
    strict: bool,
) -> Result<OscillationResult> {
    check_inputs(state, mixing, channel)?;
    if geom.horizon.is_some() {
        return Err(Error::InvalidInput("closed forms need an unbounded time horizon".into()));
    }
    let distance = geom.baseline - state.center;
    if !(distance > 0.0) {
        return Err(Error::InvalidInput(format!("packet centre {} is not behind the detector", state.center)));
    }
    let flags = regime_flags(state, channel, distance, false);
    match mode {
        ClosedMode::Simplified => {
            let tau = channel.tau_dec.min(channel.tau_sup());
            let ratio = max_separation(state, distance) / tau;
            if strict && ratio > SEPARATION_LIMIT {
                return Err(Error::RegimeViolation(format!(
                    "arrival-time separation is {ratio:.3e} of min(tau_dec, tau_sup), above {SEPARATION_LIMIT}"
                )));
            }
            Ok(simplified(state, mixing, channel, distance, flags))
        }
        ClosedMode::General => general(state, mixing, channel, distance, flags),
    }
}

fn simplified(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    distance: f64,
    flags: Vec<crate::flags::RegimeFlag>,
) -> OscillationResult {
    let c = branch_weights(state, mixing, channel.detection_flavor);
    let n = c.len();
    let diagonal: Vec<f64> = (0..n).map(|i| c[i].norm_sqr() * decay_factor(state, i, i, distance)).collect();
    let mut value: f64 = diagonal.iter().sum();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let k = oscillation_wavenumber(&state.spectrum, i, j, channel.epsilon_th);
            let t = (c[i] * c[j].conj()).conj();
            value += 2.0 * decay_factor(state, i, j, distance) * (t * Complex64::from_polar(1.0, k * distance)).re;
            pairs.push(PairTerm { i, j, t, k });
        }
    }
    OscillationResult { value, diagonal, pairs, flags, imag_residual: 0.0 }
}

fn general(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    distance: f64,
    flags: Vec<crate::flags::RegimeFlag>,
) -> Result<OscillationResult> {
    let c = branch_weights(state, mixing, channel.detection_flavor);
    let n = c.len();
    let kernel = KernelSpec::from_channel(channel);
    let mut diagonal = Vec::with_capacity(n);
    let mut imag = 0.0;
    let mut value = 0.0;
    for i in 0..n {
        let w = c[i].norm_sqr();
        if w == 0.0 {
            diagonal.push(0.0);
            continue;
        }
        let j_ii = pair_integral(state, &kernel, channel, distance, i, i)? * w;
        diagonal.push(j_ii.re);
        imag += j_ii.im;
        value += j_ii.re;
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let k = oscillation_wavenumber(&state.spectrum, i, j, channel.epsilon_th);
            let weight = c[i] * c[j].conj();
            let j_ij = if weight == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                pair_integral(state, &kernel, channel, distance, i, j)? * weight
            };
            value += 2.0 * j_ij.re;
            let t = j_ij.conj() * Complex64::from_polar(1.0 / decay_factor(state, i, j, distance), -k * distance);
            pairs.push(PairTerm { i, j, t, k });
        }
    }
    Ok(OscillationResult { value, diagonal, pairs, flags, imag_residual: imag.abs() })
}

/// int dxi F(xi) e^{-i eps xi} int du psi_i(u - xi/2) psi_j*(u + xi/2), with the
/// u integral done in closed form for Gaussian packets.
fn pair_integral(
    state: &WavePacketState,
    kernel: &KernelSpec,
    channel: &DetectionChannel,
    distance: f64,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    let ei = state.spectrum.eigenstate(i);
    let ej = state.spectrum.eigenstate(j);
    let ki = state.spectrum.kinematics(i);
    let kj = state.spectrum.kinematics(j);
    let (vi2, vj2) = (ki.velocity * ki.velocity, kj.velocity * kj.velocity);
    let s2 = state.sigma * state.sigma;
    let ti = arrival_time(state, i, distance);
    let tj = arrival_time(state, j, distance);
    let a = (vi2 + vj2) / (2.0 * s2);
    let r = vi2 * vj2 / (2.0 * s2 * (vi2 + vj2));
    let kappa = Complex64::new(ei.decay_rate + ej.decay_rate, ki.energy - kj.energy);
    let kappa_term = kappa * kappa / (4.0 * a);
    let prefactor = (PI * s2).powf(-0.5) * (PI / a).sqrt();
    let eps = channel.epsilon_th;
    let momentum_phase = (ei.momentum - ej.momentum) * distance;
    let inner = |xi: f64| {
        let mi = ti + 0.5 * xi;
        let mj = tj - 0.5 * xi;
        let m = (vi2 * mi + vj2 * mj) / (vi2 + vj2);
        let gauss = -r * (mi - mj) * (mi - mj);
        let lambda_re = 0.5 * (ei.decay_rate - ej.decay_rate) * xi;
        let phase = (0.5 * (ki.energy + kj.energy) - eps) * xi + momentum_phase;
        let exponent = Complex64::new(gauss + lambda_re, phase) - kappa * m + kappa_term;
        f_kernel(xi, kernel, kernel.tau_dec) * exponent.exp() * prefactor
    };
    let centre = tj - ti;
    let half = XI_WINDOW * state.sigma * (1.0 / ki.velocity + 1.0 / kj.velocity);
    let cutoff = 12.0 * kernel.tau_dec.max(kernel.tau_sup());
    let lo = (centre - half).max(-cutoff);
    let hi = (centre + half).min(cutoff);
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let freq = (0.5 * (ki.energy + kj.energy) - eps).abs() + 0.5 * (ki.energy - kj.energy).abs();
    let panels = panel_count(hi - lo, state.sigma / ki.velocity.max(kj.velocity), freq)?;
    let opts = QuadOptions::relative(1e-10).with_panels(panels).with_max_intervals(panels * 64 + 256);
    Ok(integrate(inner, lo, hi, &opts)?.value)
}

/// Initial panels so that each covers at most one oscillation period and two
/// envelope widths.
pub(crate) fn panel_count(range: f64, envelope: f64, freq: f64) -> Result<usize> {
    let by_envelope = range / (2.0 * envelope);
    let by_phase = range * freq / (2.0 * PI);
    let n = by_envelope.max(by_phase).ceil();
    if !(n.is_finite()) || n > MAX_PANELS as f64 {
        return Err(Error::NonConvergent(format!(
            "{n:.3e} panels needed to resolve the integrand over a range of {range:.3e}"
        )));
    }
    Ok((n as usize).max(4))
}
