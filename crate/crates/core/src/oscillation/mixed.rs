use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    detection_probability_closed, detection_probability_numeric, oscillation_wavenumber, ClosedMode,
    ExperimentGeometry, NumericOptions, OscillationResult, PairTerm,
};
use crate::error::{Error, Result};
use crate::flags::{push_unique, RegimeFlag};
use crate::types::{DetectionChannel, MixingMatrix, WavePacketState};

/// Phase spreads above this many radians are flagged as degrading the
/// oscillation.
pub const PHASE_SPREAD_LIMIT: f64 = 0.3;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A packet prepared at position q with common momentum p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub q: f64,
    pub p: f64,
    pub weight: f64,
}

/// Classical mixture of packets sharing sigma, flavor and masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedInitialState {
    base: WavePacketState,
    components: Vec<MixtureComponent>,
}

impl MixedInitialState {
    /// `base` supplies sigma, the production flavor and the masses; its
    /// momenta and centre are replaced component by component.
    pub fn new(base: WavePacketState, components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("mixture has no components".into()));
        }
        for c in &components {
            if !(c.weight >= 0.0) || !c.q.is_finite() || !(c.p > 0.0 && c.p.is_finite()) {
                return Err(Error::InvalidInput(format!("bad mixture component {c:?}")));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { base, components })
    }

    /// Equal weights over the given positions at one momentum.
    pub fn uniform_positions(base: WavePacketState, positions: &[f64], p: f64) -> Result<Self> {
        let w = 1.0 / positions.len() as f64;
        let comps = positions.iter().map(|&q| MixtureComponent { q, p, weight: w }).collect();
        Self::new(base, comps)
    }

    pub fn base(&self) -> &WavePacketState {
        &self.base
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// The pure state of one component: centre -q, every p_i = p.
    pub fn component_state(&self, k: usize) -> Result<WavePacketState> {
        let c = self.components[k];
        let mut state = self.base.clone().centered_at(-c.q);
        state.spectrum = state.spectrum.with_common_momentum(c.p)?;
        Ok(state)
    }

    fn mean_momentum(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Closed(ClosedMode),
    Numeric(NumericOptions),
}

impl Engine {
    pub fn evaluate(
        &self,
        state: &WavePacketState,
        mixing: &MixingMatrix,
        channel: &DetectionChannel,
        geom: &ExperimentGeometry,
    ) -> Result<OscillationResult> {
        match self {
            Engine::Closed(mode) => detection_probability_closed(state, mixing, channel, geom, *mode),
            Engine::Numeric(opts) => detection_probability_numeric(state, mixing, channel, geom, opts),
        }
    }
}

/// Weighted sum of pure-state densities. Pair terms are merged only when
/// every component has the same momentum, hence the same k_ij.
pub fn mixed_state_probability(
    mix: &MixedInitialState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    engine: &Engine,
) -> Result<OscillationResult> {
    let mut parts = Vec::with_capacity(mix.components.len());
    for (k, c) in mix.components.iter().enumerate() {
        let state = mix.component_state(k)?;
        let r = engine.evaluate(&state, mixing, channel, geom)?;
        parts.push((c.weight, geom.baseline + c.q, r));
    }
    let reference = geom.baseline - mix.base.center;
    let same_p = mix.components.iter().all(|c| c.p == mix.components[0].p);
    let mut out = combine(&parts, same_p.then_some(reference));
    for flag in phase_spread_bounds(mix, channel.epsilon_th, geom.baseline)
        .into_iter()
        .filter(|f| matches!(f, RegimeFlag::PhaseSpread { bound, .. } if *bound > PHASE_SPREAD_LIMIT))
    {
        push_unique(&mut out.flags, flag);
    }
    Ok(out)
}

/// Weighted sum of results. With `reference` set, each pair term is moved to
/// a common distance so that 2 Re(t e^{ikX}) keeps its meaning.
fn combine(parts: &[(f64, f64, OscillationResult)], reference: Option<f64>) -> OscillationResult {
    let mut value = 0.0;
    let mut imag = 0.0;
    let mut flags = Vec::new();
    let n_diag = parts.iter().map(|p| p.2.diagonal.len()).max().unwrap_or(0);
    let mut diagonal = vec![0.0; n_diag];
    let mut pairs: Vec<PairTerm> = Vec::new();
    for (w, distance, r) in parts {
        value += w * r.value;
        imag += w * r.imag_residual;
        for (d, x) in diagonal.iter_mut().zip(&r.diagonal) {
            *d += w * x;
        }
        for f in &r.flags {
            push_unique(&mut flags, f.clone());
        }
        if let Some(x_ref) = reference {
            for p in &r.pairs {
                let shift = Complex64::from_polar(*w, p.k * (distance - x_ref));
                match pairs.iter_mut().find(|q| (q.i, q.j) == (p.i, p.j)) {
                    Some(q) => q.t += p.t * shift,
                    None => pairs.push(PairTerm { t: p.t * shift, ..*p }),
                }
            }
        }
    }
    OscillationResult { value, diagonal, pairs, flags, imag_residual: imag }
}

/// Upper bounds |k_ij| L (d/L + dp/p) on the phase spread of every pair, with
/// d and dp the full ranges of q and p in the mixture.
pub fn phase_spread_bounds(mix: &MixedInitialState, epsilon_th: f64, baseline: f64) -> Vec<RegimeFlag> {
    let range = |f: fn(&MixtureComponent) -> f64| {
        let lo = mix.components.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = mix.components.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let d = range(|c| c.q);
    let dp = range(|c| c.p);
    let pbar = mix.mean_momentum();
    let Ok(spectrum) = mix.base.spectrum.with_common_momentum(pbar) else {
        return Vec::new();
    };
    let n = spectrum.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let phi = (oscillation_wavenumber(&spectrum, i, j, epsilon_th) * baseline).abs();
            out.push(RegimeFlag::PhaseSpread { pair: (i, j), bound: phi * (d / baseline + dp / pbar) });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedChannel {
    pub channel: DetectionChannel,
    /// Channel constant K'_n.
    pub weight: f64,
}

/// Sum over detection channels of K'_n times the simplified closed form. Pair
/// terms are listed per channel, scaled by K'_n, since each channel has its
/// own k_ij.
pub fn multi_channel_probability(
    channels: &[WeightedChannel],
    state: &WavePacketState,
    mixing: &MixingMatrix,
    geom: &ExperimentGeometry,
) -> Result<OscillationResult> {
    if channels.is_empty() {
        return Err(Error::InvalidInput("at least one detection channel is required".into()));
    }
    let mut value = 0.0;
    let mut diagonal = vec![0.0; state.n_states()];
    let mut pairs = Vec::new();
    let mut flags = Vec::new();
    for wc in channels {
        if !(wc.weight >= 0.0) {
            return Err(Error::InvalidInput(format!("channel weight {} < 0", wc.weight)));
        }
        let r = detection_probability_closed(state, mixing, &wc.channel, geom, ClosedMode::Simplified)?;
        value += wc.weight * r.value;
        for (d, x) in diagonal.iter_mut().zip(&r.diagonal) {
            *d += wc.weight * x;
        }
        pairs.extend(r.pairs.iter().map(|p| PairTerm { t: p.t * wc.weight, ..*p }));
        for f in r.flags {
            push_unique(&mut flags, f);
        }
    }
    Ok(OscillationResult { value, diagonal, pairs, flags, imag_residual: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MassSpectrum;
    use std::f64::consts::PI;

    fn setup() -> (WavePacketState, MixingMatrix, DetectionChannel) {
        let spec = MassSpectrum::equal_momentum(&[0.75, 0.76], 1.0).unwrap();
        let state = WavePacketState::new(1.6, 0, spec).unwrap();
        let ch = DetectionChannel::with_timescales(0.75, 1e4, 1e4, 100.0, 0).unwrap();
        (state, MixingMatrix::rotation(PI / 5.0), ch)
    }

    #[test]
    fn rejects_unnormalized_weights() {
        let (state, _, _) = setup();
        let c = vec![MixtureComponent { q: 0.0, p: 1.0, weight: 0.5 }];
        assert!(MixedInitialState::new(state, c).is_err());
    }

    #[test]
    fn single_component_is_pure_state() {
        let (state, u, ch) = setup();
        let g = ExperimentGeometry::new(700.0).unwrap();
        let mix = MixedInitialState::uniform_positions(state.clone(), &[0.0], 1.0).unwrap();
        let a = mixed_state_probability(&mix, &u, &ch, &g, &Engine::Closed(ClosedMode::Simplified)).unwrap();
        let b = detection_probability_closed(&state, &u, &ch, &g, ClosedMode::Simplified).unwrap();
        assert_eq!(a.value, b.value);
        assert!((a.pairs[0].t - b.pairs[0].t).norm() < 1e-15);
    }

    #[test]
    fn component_is_shifted_baseline() {
        let (state, u, ch) = setup();
        let q = 37.0;
        let mix = MixedInitialState::uniform_positions(state.clone(), &[q], 1.0).unwrap();
        let engine = Engine::Closed(ClosedMode::Simplified);
        let a = mixed_state_probability(&mix, &u, &ch, &ExperimentGeometry::new(500.0).unwrap(), &engine).unwrap();
        let b = engine.evaluate(&state, &u, &ch, &ExperimentGeometry::new(500.0 + q).unwrap()).unwrap();
        assert!((a.value - b.value).abs() < 1e-14);
    }

    #[test]
    fn merged_pairs_reproduce_value() {
        let (state, u, ch) = setup();
        let mix = MixedInitialState::uniform_positions(state, &[-40.0, 0.0, 25.0], 1.0).unwrap();
        let g = ExperimentGeometry::new(900.0).unwrap();
        let r = mixed_state_probability(&mix, &u, &ch, &g, &Engine::Closed(ClosedMode::Simplified)).unwrap();
        let p = r.pairs[0];
        let rebuilt: f64 = r.diagonal.iter().sum::<f64>() + 2.0 * (p.t * Complex64::from_polar(1.0, p.k * 900.0)).re;
        assert!((rebuilt - r.value).abs() < 1e-12);
    }

    #[test]
    fn phase_spread_is_flagged() {
        let (state, u, ch) = setup();
        let k = oscillation_wavenumber(&state.spectrum, 0, 1, ch.epsilon_th).abs();
        let lambda = 2.0 * PI / k;
        let g = ExperimentGeometry::new(5.0 * lambda).unwrap();
        let engine = Engine::Closed(ClosedMode::Simplified);
        let narrow = MixedInitialState::uniform_positions(state.clone(), &[0.0, lambda / 100.0], 1.0).unwrap();
        let r = mixed_state_probability(&narrow, &u, &ch, &g, &engine).unwrap();
        assert!(!r.flags.iter().any(|f| matches!(f, RegimeFlag::PhaseSpread { .. })));
        let wide = MixedInitialState::uniform_positions(state, &[0.0, lambda / 4.0], 1.0).unwrap();
        let r = mixed_state_probability(&wide, &u, &ch, &g, &engine).unwrap();
        assert!(r.flags.iter().any(|f| matches!(f, RegimeFlag::PhaseSpread { .. })));
    }

    #[test]
    fn channel_sum_is_convex() {
        let (state, u, ch) = setup();
        let g = ExperimentGeometry::new(650.0).unwrap();
        let one = multi_channel_probability(&[WeightedChannel { channel: ch.clone(), weight: 1.0 }], &state, &u, &g).unwrap();
        let split = multi_channel_probability(
            &[WeightedChannel { channel: ch.clone(), weight: 0.3 }, WeightedChannel { channel: ch.clone(), weight: 0.7 }],
            &state,
            &u,
            &g,
        )
        .unwrap();
        assert!((one.value - split.value).abs() < 1e-14);
        let direct = detection_probability_closed(&state, &u, &ch, &g, ClosedMode::Simplified).unwrap();
        assert_eq!(one.value, direct.value);
        assert!(multi_channel_probability(&[], &state, &u, &g).is_err());
    }
}
