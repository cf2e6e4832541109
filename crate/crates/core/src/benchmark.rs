//! Desk-scale parameter sets: two flavors whose arrival-time separation is a
//! small fraction of the detector timescales, at magnitudes that keep the
//! double integral cheap.

use std::f64::consts::PI;

use crate::error::Result;
use crate::oscillation::oscillation_wavenumber;
use crate::types::{DetectionChannel, MassSpectrum, MixingMatrix, WavePacketState};

/// Mass of the lighter eigenstate, in units of the common momentum.
pub const LIGHT_MASS: f64 = 0.75;

/// Product mass times position accuracy of the detection channel.
pub const M_DELTA: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub state: WavePacketState,
    pub mixing: MixingMatrix,
    pub channel: DetectionChannel,
    pub baselines: Vec<f64>,
}

impl Benchmark {
    /// k_12 of the channel.
    pub fn wavenumber(&self) -> f64 {
        oscillation_wavenumber(&self.state.spectrum, 0, 1, self.channel.epsilon_th)
    }
}

/// Equal-momentum (p = 1) pair with E_2 = E_1 + energy_gap.
fn two_flavor(energy_gap: f64) -> Result<MassSpectrum> {
    let e1 = (1.0 + LIGHT_MASS * LIGHT_MASS).sqrt();
    let e2 = e1 + energy_gap;
    MassSpectrum::equal_momentum(&[LIGHT_MASS, (e2 * e2 - 1.0).sqrt()], 1.0)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Closed-form equivalence set: separation about 1e-3 of the kernel
/// timescales over three wavelengths starting at L = 200.
pub fn equivalence() -> Result<Benchmark> {
    let state = WavePacketState::new(1.6, 0, two_flavor(0.00714)?)?;
    let channel = DetectionChannel::with_timescales(0.75, 1e4, 1e4, M_DELTA, 1)?;
    let mut b = Benchmark { state, mixing: MixingMatrix::rotation(PI / 6.0), channel, baselines: Vec::new() };
    let span = 6.0 * PI / b.wavenumber().abs();
    b.baselines = linspace(200.0, 200.0 + span, 121);
    Ok(b)
}

/// Crossover set with tau_dec = tau_sup = tau. Arrival-time separations run
/// from 5 to 20 over the grid.
pub fn crossover(tau: f64) -> Result<Benchmark> {
    let state = WavePacketState::new(6.4, 0, two_flavor(0.0078)?)?;
    let channel = DetectionChannel::with_timescales(0.8125, tau, tau, M_DELTA, 1)?;
    Ok(Benchmark { state, mixing: MixingMatrix::rotation(PI / 4.0), channel, baselines: linspace(640.0, 2560.0, 161) })
}

/// The tau values scanned by the crossover check, from well separated to
/// below a tenth of the smallest separation.
pub const CROSSOVER_TAUS: [f64; 8] = [1e4, 1e3, 1e2, 30.0, 10.0, 3.0, 1.0, 0.3];
