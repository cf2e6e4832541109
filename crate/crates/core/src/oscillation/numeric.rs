use std::cell::Cell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::closed::panel_count;
use super::{
    branch_weights, check_inputs, oscillation_wavenumber, regime_flags, ExperimentGeometry, OscillationResult,
    PairTerm,
};
use crate::amplitudes::{branch_momentum_integral, AmplitudeModel, BranchEvaluator};
use crate::error::{Error, Result};
use crate::kernels::{f_kernel, KernelSpec};
use crate::quad::{integrate, QuadOptions};
use crate::types::{DetectionChannel, MixingMatrix, WavePacketState};

/// Amplitude envelopes are cut at this many temporal widths.
const ENVELOPE_CUT: f64 = 8.0;

/// Absolute quadrature floors, as a fraction of rel_tol times the size the
/// integrals would have without any interference.
const ABS_FLOOR: f64 = 1e-3;

/// |Im| / |Re| always tolerated in the total before the result is rejected.
const IMAG_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    /// Relative tolerance of both the outer (xi) and inner (u) quadrature.
    pub rel_tol: f64,
    pub amplitude: AmplitudeModel,
    pub max_intervals: usize,
    /// Integrate every pair separately to fill the per-pair breakdown; the
    /// default integrates the whole correlation once.
    pub pair_breakdown: bool,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, amplitude: AmplitudeModel::NoDispersion, max_intervals: 4000, pair_breakdown: false }
    }
}

/// K int int dt dt' A(t, L) A*(t', L) e^{-i eps (t' - t)} F(t' - t) with K = 1,
/// in the coordinates u = (t + t')/2, xi = t' - t.
pub fn detection_probability_numeric(
    state: &WavePacketState,
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    opts: &NumericOptions,
) -> Result<OscillationResult> {
    numeric_mixture(&[(1.0, state.clone())], mixing, channel, geom, opts)
}

enum Branch<'a> {
    Fast(BranchEvaluator),
    Quadrature(&'a WavePacketState, usize),
}

impl Branch<'_> {
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        match self {
            Branch::Fast(b) => b.eval(t, x),
            Branch::Quadrature(s, i) => branch_momentum_integral(s, *i, t, x).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        }
    }
}

struct Component<'a> {
    weight: f64,
    branches: Vec<Branch<'a>>,
}

/// One pass over the weighted sum of the components' correlations.
pub(crate) fn numeric_mixture(
    components: &[(f64, WavePacketState)],
    mixing: &MixingMatrix,
    channel: &DetectionChannel,
    geom: &ExperimentGeometry,
    opts: &NumericOptions,
) -> Result<OscillationResult> {
    let Some((_, first)) = components.first() else {
        return Err(Error::InvalidInput("no initial-state components".into()));
    };
    for (w, s) in components {
        check_inputs(s, mixing, channel)?;
        if s.n_states() != first.n_states() {
            return Err(Error::InvalidInput("components differ in number of eigenstates".into()));
        }
        if !(*w >= 0.0) {
            return Err(Error::InvalidInput(format!("component weight {w} < 0")));
        }
    }
    let n = first.n_states();
    let l = geom.baseline;
    let c = branch_weights(first, mixing, channel.detection_flavor);
    let kernel = KernelSpec::from_channel(channel);
    let eps = channel.epsilon_th;

    let comps: Vec<Component> = components
        .iter()
        .map(|(w, s)| Component {
            weight: *w,
            branches: (0..n)
                .map(|i| match opts.amplitude {
                    AmplitudeModel::MomentumIntegral => Branch::Quadrature(s, i),
                    m => Branch::Fast(BranchEvaluator::new(s, i, m)),
                })
                .collect(),
        })
        .collect();

    // Temporal support of each branch at x = L, over all components.
    let mut support = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    let mut envelope = f64::INFINITY;
    let mut v_min = f64::INFINITY;
    let mut freq_xi: f64 = 0.0;
    let mut freq_u: f64 = 0.0;
    for (_, s) in components {
        for (i, sup) in support.iter_mut().enumerate() {
            let b = BranchEvaluator::new(s, i, opts.amplitude);
            let t0 = (l - s.center) / b.velocity();
            let half = ENVELOPE_CUT * b.width(t0) / b.velocity();
            sup.0 = sup.0.min(t0 - half);
            sup.1 = sup.1.max(t0 + half);
            envelope = envelope.min(s.sigma / b.velocity());
            v_min = v_min.min(b.velocity());
            freq_xi = freq_xi.max((b.energy() - eps).abs());
            for j in 0..n {
                let e_j = s.spectrum.kinematics(j).energy;
                freq_u = freq_u.max((b.energy() - e_j).abs());
            }
        }
    }
    let cutoff = 12.0 * kernel.tau_dec.max(kernel.tau_sup());
    // int |psi_i|^2 dt = 1 / v_i for the undispersed packet
    let total_weight: f64 = components.iter().map(|(w, _)| w).sum();
    let weight_sum: f64 = c.iter().map(|x| x.norm()).sum();
    let f0 = f_kernel(0.0, &kernel, kernel.tau_dec).norm();
    let horizon = geom.horizon.unwrap_or(f64::INFINITY);

    let main = components.iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|(_, s)| s).unwrap_or(first);
    let flags = regime_flags(main, channel, l - main.center, opts.amplitude != AmplitudeModel::NoDispersion);

    // Integrates the (i, j) block; `None` sums every block at once.
    let correlate = |block: Option<(usize, usize)>| -> Result<(Complex64, f64)> {
        let (si, sj) = match block {
            Some((i, j)) => (support[i], support[j]),
            None => {
                let lo = support.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
                let hi = support.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
                ((lo, hi), (lo, hi))
            }
        };
        let xi_lo = (sj.0 - si.1).max(-cutoff);
        let xi_hi = (sj.1 - si.0).min(cutoff);
        if xi_lo >= xi_hi {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let scale = match block {
            Some(_) => total_weight / v_min,
            None => total_weight * weight_sum * weight_sum / v_min,
        };
        let inner_abs = ABS_FLOOR * opts.rel_tol * scale;
        let outer_abs = inner_abs * f0 * envelope;
        let failure: Cell<Option<Error>> = Cell::new(None);
        let amplitude = |comp: &Component, t: f64, pick: Option<usize>| -> Complex64 {
            match pick {
                Some(i) => comp.branches[i].eval(t, l),
                None => comp.branches.iter().zip(&c).map(|(b, ci)| ci * b.eval(t, l)).sum(),
            }
        };
        let (left, right) = match block {
            Some((i, j)) => (Some(i), Some(j)),
            None => (None, None),
        };
        let outer = |xi: f64| -> Complex64 {
            let lo = (si.0 + 0.5 * xi).max(sj.0 - 0.5 * xi).max(0.5 * xi.abs());
            let hi = (si.1 + 0.5 * xi).min(sj.1 - 0.5 * xi).min(horizon - 0.5 * xi.abs());
            if lo >= hi {
                return Complex64::new(0.0, 0.0);
            }
            let inner = |u: f64| -> Complex64 {
                comps
                    .iter()
                    .map(|comp| {
                        amplitude(comp, u - 0.5 * xi, left) * amplitude(comp, u + 0.5 * xi, right).conj() * comp.weight
                    })
                    .sum()
            };
            let panels = match panel_count(hi - lo, envelope, freq_u) {
                Ok(p) => p,
                Err(e) => {
                    failure.set(Some(e));
                    return Complex64::new(f64::NAN, 0.0);
                }
            };
            let q = QuadOptions::relative(opts.rel_tol)
                .with_abs_tol(inner_abs)
                .with_panels(panels)
                .with_max_intervals(opts.max_intervals);
            match integrate(inner, lo, hi, &q) {
                Ok(est) => f_kernel(xi, &kernel, kernel.tau_dec) * Complex64::from_polar(1.0, -eps * xi) * est.value,
                Err(e) => {
                    failure.set(Some(e.into()));
                    Complex64::new(f64::NAN, 0.0)
                }
            }
        };
        let panels = panel_count(xi_hi - xi_lo, envelope, freq_xi + freq_u)?;
        let q = QuadOptions::relative(opts.rel_tol)
            .with_abs_tol(outer_abs)
            .with_panels(panels)
            .with_max_intervals(opts.max_intervals);
        let result = integrate(outer, xi_lo, xi_hi, &q);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let est = result?;
        Ok((est.value, est.error))
    };

    // The residual may not exceed the quadrature error by much.
    let check_imag = |re: f64, im: f64, err: f64| -> Result<()> {
        if im.abs() > (IMAG_TOLERANCE * re.abs()).max(10.0 * err) {
            Err(Error::NonConvergent(format!("imaginary residual {im:.3e} against real part {re:.3e}")))
        } else {
            Ok(())
        }
    };

    if !opts.pair_breakdown {
        let (total, err) = correlate(None)?;
        check_imag(total.re, total.im, err)?;
        return Ok(OscillationResult {
            value: total.re,
            diagonal: Vec::new(),
            pairs: Vec::new(),
            flags,
            imag_residual: total.im.abs(),
        });
    }

    let mut diagonal = Vec::with_capacity(n);
    let mut imag = 0.0;
    let mut value = 0.0;
    let mut err = 0.0;
    for i in 0..n {
        let w = c[i].norm_sqr();
        let (j_ii, e) = if w == 0.0 { (Complex64::new(0.0, 0.0), 0.0) } else { correlate(Some((i, i)))? };
        let j_ii = j_ii * w;
        err += e * w;
        diagonal.push(j_ii.re);
        imag += j_ii.im;
        value += j_ii.re;
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let weight = c[i] * c[j].conj();
            let j_ij = if weight == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                let (v, e) = correlate(Some((i, j)))?;
                err += 2.0 * e * weight.norm();
                v * weight
            };
            value += 2.0 * j_ij.re;
            let k = oscillation_wavenumber(&first.spectrum, i, j, eps);
            let distance = l - first.center;
            let decay = super::decay_factor(first, i, j, distance);
            let t = j_ij.conj() * Complex64::from_polar(1.0 / decay, -k * distance);
            pairs.push(PairTerm { i, j, t, k });
        }
    }
    check_imag(value, imag, err)?;
    Ok(OscillationResult { value, diagonal, pairs, flags, imag_residual: imag.abs() })
}
