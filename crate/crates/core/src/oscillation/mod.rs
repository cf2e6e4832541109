//! The detection-probability engine: the double-time master integral, its
//! closed forms, oscillation wavenumbers, mixtures and multi-channel sums.
//!
//! Normalization: the overall constants K and K' are set to 1. Curves can be
//! rescaled afterwards (see [`crate::analysis::Curve::normalized`]).

mod closed;
mod mixed;
mod numeric;
mod smear;
mod sweep;
mod wavenumbers;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::{push_unique, RegimeFlag};
use crate::kernels::KernelSpec;
use crate::types::{DetectionChannel, MixingMatrix, WavePacketState};

pub use closed::{detection_probability_closed, detection_probability_closed_unchecked, ClosedMode};
pub use mixed::{
    mixed_state_probability, multi_channel_probability, phase_spread_bounds, Engine, MixedInitialState,
    MixtureComponent, WeightedChannel, PHASE_SPREAD_LIMIT,
};
pub use numeric::{detection_probability_numeric, NumericOptions};
pub use smear::{sampling_smear, smear_curve, SmearedGrid};
pub use sweep::sweep;
pub use wavenumbers::{
    oscillation_wavenumber, standard_wavenumber, wavenumber_near_degenerate, wavenumber_ultra_relativistic,
};

/// Baselines shorter than this many packet widths are flagged.
pub const MIN_BASELINE_RATIO: f64 = 100.0;

/// Closed forms need arrival-time separations below this fraction of the
/// shorter kernel timescale.
pub const SEPARATION_LIMIT: f64 = 0.1;

/// Wave-packet spreading mu t / sigma^2 above this is flagged.
pub const DISPERSION_LIMIT: f64 = 0.1;

/// Source-detector distance and the time horizon of the measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGeometry {
    pub baseline: f64,
    /// None means the detector records for all t >= 0.
    pub horizon: Option<f64>,
}

impl ExperimentGeometry {
    pub fn new(baseline: f64) -> Result<Self> {
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::InvalidInput(format!("baseline = {baseline} must be > 0")));
        }
        Ok(Self { baseline, horizon: None })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon = {horizon} must be > 0")));
        }
        self.horizon = if horizon.is_infinite() { None } else { Some(horizon) };
        Ok(self)
    }
}

/// Interference term of eigenstates i < j. The pair contributes
/// 2 e^{-(Gamma_i/v_i + Gamma_j/v_j) L} Re(t e^{i k L}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub t: Complex64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationResult {
    /// Unnormalized probability density at the baseline.
    pub value: f64,
    /// Diagonal terms S_i, decay factors included.
    pub diagonal: Vec<f64>,
    pub pairs: Vec<PairTerm>,
    pub flags: Vec<RegimeFlag>,
    /// |Im| of the summed diagonal terms from the quadrature paths; zero for
    /// the simplified closed form.
    pub imag_residual: f64,
}

impl OscillationResult {
    /// k_ij for any ordering; k_ji = -k_ij and k_ii = 0.
    pub fn wavenumber(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(0.0);
        }
        self.pairs.iter().find_map(|p| {
            if (p.i, p.j) == (i, j) {
                Some(p.k)
            } else if (p.i, p.j) == (j, i) {
                Some(-p.k)
            } else {
                None
            }
        })
    }
}

/// c_i = U*_{beta i} U_{alpha i}
pub(crate) fn branch_weights(state: &WavePacketState, mixing: &MixingMatrix, alpha: usize) -> Vec<Complex64> {
    (0..state.n_states()).map(|i| mixing.branch_weight(state.production_flavor, alpha, i)).collect()
}

pub(crate) fn check_inputs(state: &WavePacketState, mixing: &MixingMatrix, channel: &DetectionChannel) -> Result<()> {
    let n = state.n_states();
    if mixing.dim() != n {
        return Err(Error::InvalidInput(format!("mixing matrix is {0}x{0} but the spectrum has {n} states", mixing.dim())));
    }
    if channel.detection_flavor >= n {
        return Err(Error::InvalidInput(format!("detection flavor {} out of range 0..{n}", channel.detection_flavor)));
    }
    if state.spectrum.eigenstates().iter().any(|e| e.momentum <= 0.0) {
        return Err(Error::InvalidInput("oscillation engine needs p_i > 0 for every eigenstate".into()));
    }
    Ok(())
}

/// Arrival time X / v_i of branch i for an effective distance X.
pub(crate) fn arrival_time(state: &WavePacketState, i: usize, distance: f64) -> f64 {
    distance * state.spectrum.inverse_velocity(i)
}

/// Largest arrival-time separation between any two branches.
pub(crate) fn max_separation(state: &WavePacketState, distance: f64) -> f64 {
    let times: Vec<f64> = (0..state.n_states()).map(|i| arrival_time(state, i, distance)).collect();
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Flags shared by every path.
pub(crate) fn regime_flags(
    state: &WavePacketState,
    channel: &DetectionChannel,
    distance: f64,
    dispersive_amplitudes: bool,
) -> Vec<RegimeFlag> {
    let mut flags = KernelSpec::from_channel(channel).flags();
    let ratio = distance / state.sigma;
    if ratio < MIN_BASELINE_RATIO {
        push_unique(&mut flags, RegimeFlag::ShortBaseline { l_over_sigma: ratio });
    }
    let tau = channel.tau_dec.min(channel.tau_sup());
    let sep = max_separation(state, distance) / tau;
    if sep > SEPARATION_LIMIT {
        push_unique(&mut flags, RegimeFlag::ScaleSeparation { ratio: sep });
    }
    if !dispersive_amplitudes {
        let worst = (0..state.n_states())
            .map(|i| crate::amplitudes::dispersion_parameter(state, i, arrival_time(state, i, distance)))
            .fold(0.0, f64::max);
        if worst > DISPERSION_LIMIT {
            push_unique(&mut flags, RegimeFlag::Dispersion { parameter: worst });
        }
    }
    let window = 12.0 * channel.tau_dec.max(channel.tau_sup());
    let decay = state.spectrum.eigenstates().iter().map(|e| e.decay_rate).fold(0.0, f64::max);
    if decay * window > 0.1 {
        push_unique(&mut flags, RegimeFlag::DecayCutoff { ratio: decay * window });
    }
    flags
}

/// e^{-(Gamma_i/v_i + Gamma_j/v_j) L}
pub(crate) fn decay_factor(state: &WavePacketState, i: usize, j: usize, distance: f64) -> f64 {
    let g = |k: usize| state.spectrum.eigenstate(k).decay_rate * state.spectrum.inverse_velocity(k);
    (-(g(i) + g(j)) * distance).exp()
}

/// Largest arrival-time difference between eigenstates of a packet that
/// travels `distance`.
pub fn max_separation_at(state: &WavePacketState, distance: f64) -> f64 {
    max_separation(state, distance)
}
