//! Turns a validated scenario into curves.

use osc_povm::analysis::{
    event_distribution, extract_wavenumber, statistical_distance, wavelength_curves, ComparisonModel, Curve,
    CurveMeta,
};
use osc_povm::meas_models::{kijowski_pdf, kijowski_total, two_packet_arrival_pdf, MomentumWavefunction};
use osc_povm::oscillation::{
    detection_probability_closed, detection_probability_closed_unchecked, detection_probability_numeric,
    mixed_state_probability, multi_channel_probability, oscillation_wavenumber, smear_curve, sweep, Engine,
    ExperimentGeometry, OscillationResult,
};
use osc_povm::{Error, RegimeFlag};
use thiserror::Error;

use crate::config::{Geometry, Mode, Physics, ScenarioConfig, ToaSettings, WavelengthSettings};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("regime violation in strict mode: {}", .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Regime(Vec<RegimeFlag>),
}

impl RunError {
    /// 1 for configuration problems, 2 for numerical failures, 3 for regime
    /// violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Regime(_) | RunError::Engine(Error::RegimeViolation(_)) => 3,
            RunError::Engine(e) if e.is_numerical() => 2,
            RunError::Engine(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn missing(mode: Mode, what: &str) -> RunError {
    RunError::Config(format!("mode '{mode}' needs {what}"))
}

/// Keeps the first flag of each kind, and of each pair for phase spreads.
pub fn merge_flags<'a>(flags: impl IntoIterator<Item = &'a RegimeFlag>) -> Vec<RegimeFlag> {
    let mut out: Vec<RegimeFlag> = Vec::new();
    for f in flags {
        let seen = out.iter().any(|g| match (f, g) {
            (RegimeFlag::PhaseSpread { pair: a, .. }, RegimeFlag::PhaseSpread { pair: b, .. }) => a == b,
            _ => std::mem::discriminant(f) == std::mem::discriminant(g),
        });
        if !seen {
            out.push(f.clone());
        }
    }
    out
}

fn geometries(g: &Geometry) -> Result<Vec<ExperimentGeometry>> {
    g.baselines
        .iter()
        .map(|&l| {
            let geom = ExperimentGeometry::new(l)?;
            Ok(match g.horizon {
                Some(h) => geom.with_horizon(h)?,
                None => geom,
            })
        })
        .collect()
}

fn point(ph: &Physics, geom: &ExperimentGeometry, engine: &Engine, strict: bool) -> osc_povm::Result<OscillationResult> {
    let channel = &ph.channels[0].channel;
    match engine {
        Engine::Closed(mode) if strict => detection_probability_closed(&ph.state, &ph.mixing, channel, geom, *mode),
        Engine::Closed(mode) => detection_probability_closed_unchecked(&ph.state, &ph.mixing, channel, geom, *mode),
        Engine::Numeric(opts) => detection_probability_numeric(&ph.state, &ph.mixing, channel, geom, opts),
    }
}

fn engine_tag(engine: &Engine) -> &'static str {
    match engine {
        Engine::Closed(osc_povm::oscillation::ClosedMode::General) => "closed-general",
        Engine::Closed(osc_povm::oscillation::ClosedMode::Simplified) => "closed-simplified",
        Engine::Numeric(_) => "numeric",
    }
}

/// Collects one probability curve over the baseline grid.
fn baseline_curve(
    baselines: &[f64],
    results: Vec<osc_povm::Result<OscillationResult>>,
    model: &str,
) -> Result<Curve> {
    let results: Vec<OscillationResult> = results.into_iter().collect::<osc_povm::Result<_>>()?;
    let y = results.iter().map(|r| r.value).collect();
    let mut meta = CurveMeta::new("L", "eV^-1", "P", "eV", model);
    meta.flags = merge_flags(results.iter().flat_map(|r| &r.flags));
    Ok(Curve::new(baselines.to_vec(), y, meta)?)
}

fn curve_mode(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    let ph = cfg.physics.as_ref().ok_or_else(|| missing(Mode::Curve, "the physics sections"))?;
    let g = cfg.geometry.as_ref().ok_or_else(|| missing(Mode::Curve, "a geometry section"))?;
    let geoms = geometries(g)?;
    let engine = &cfg.run.engine;
    let results = sweep(&geoms, |geom| point(ph, geom, engine, cfg.run.strict));
    let mut curve = baseline_curve(&g.baselines, results, engine_tag(engine))?;
    let spectrum = &ph.state.spectrum;
    if spectrum.len() >= 2 {
        let k = oscillation_wavenumber(spectrum, 0, 1, ph.channels[0].channel.epsilon_th);
        curve.meta.scalars.insert("k_12".into(), k);
    }
    if cfg.run.fit {
        let fit = extract_wavenumber(&curve)?;
        curve.meta.scalars.insert("k_fit".into(), fit.k);
        curve.meta.scalars.insert("visibility".into(), fit.visibility);
        curve.meta.scalars.insert("fit_residual".into(), fit.residual);
    }
    let mut out = vec![curve];
    if let Some(width) = cfg.run.smear_width {
        let base = &out[0];
        let (y, flags) = smear_curve(&base.x, &base.y, width)?;
        let mut meta = base.meta.clone();
        meta.model = format!("{}-smeared", base.meta.model);
        meta.scalars.clear();
        meta.scalars.insert("smear_width".into(), width);
        meta.flags = merge_flags(base.meta.flags.iter().chain(&flags));
        out.push(Curve::new(base.x.clone(), y, meta)?);
    }
    Ok(out)
}

fn mixed_mode(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    let ph = cfg.physics.as_ref().ok_or_else(|| missing(Mode::Mixed, "the physics sections"))?;
    let g = cfg.geometry.as_ref().ok_or_else(|| missing(Mode::Mixed, "a geometry section"))?;
    let mix = cfg.mixed.as_ref().ok_or_else(|| missing(Mode::Mixed, "a mixed section"))?;
    let geoms = geometries(g)?;
    let channel = &ph.channels[0].channel;
    let results = sweep(&geoms, |geom| mixed_state_probability(mix, &ph.mixing, channel, geom, &cfg.run.engine));
    let model = format!("mixed-{}", engine_tag(&cfg.run.engine));
    Ok(vec![baseline_curve(&g.baselines, results, &model)?])
}

fn channels_mode(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    let ph = cfg.physics.as_ref().ok_or_else(|| missing(Mode::Channels, "the physics sections"))?;
    let g = cfg.geometry.as_ref().ok_or_else(|| missing(Mode::Channels, "a geometry section"))?;
    let geoms = geometries(g)?;
    let all = sweep(&geoms, |geom| multi_channel_probability(&ph.channels, &ph.state, &ph.mixing, geom));
    let mut out = vec![baseline_curve(&g.baselines, all, "all-channels")?];
    for (k, wc) in ph.channels.iter().enumerate() {
        let single = std::slice::from_ref(wc);
        let results = sweep(&geoms, |geom| multi_channel_probability(single, &ph.state, &ph.mixing, geom));
        let mut c = baseline_curve(&g.baselines, results, &format!("channel-{k}"))?;
        c.meta.scalars.insert("weight".into(), wc.weight);
        out.push(c);
    }
    Ok(out)
}

/// Half-width of the time window, in arrival widths.
const TOA_WINDOW: f64 = 8.0;

fn toa_mode(t: &ToaSettings) -> Result<Vec<Curve>> {
    let spec = t.spec;
    let psi = if t.two_packet {
        MomentumWavefunction::two_packet(&spec)?
    } else {
        MomentumWavefunction::gaussian(spec.pbar1, spec.a, spec.l)?
    };
    let (centre, width) = (spec.mean_arrival(), spec.arrival_width());
    let (lo, hi) = (centre - TOA_WINDOW * width, centre + TOA_WINDOW * width);
    let n = t.points;
    let times: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let pdf = sweep(&times, |&time| kijowski_pdf(&psi, spec.mass, time)).into_iter().collect::<osc_povm::Result<_>>()?;
    let flags = if t.two_packet { spec.flags() } else { Vec::new() };

    let mut meta = CurveMeta::new("t", "eV^-1", "pdf", "eV", "kijowski");
    meta.flags = flags.clone();
    meta.scalars.insert("total".into(), kijowski_total(&psi, spec.mass, lo, hi)?);
    meta.scalars.insert("t_mean".into(), centre);
    if t.two_packet {
        meta.scalars.insert("omega".into(), spec.omega());
    }
    let exact = Curve::new(times.clone(), pdf, meta)?;
    let mut meta = CurveMeta::new("t", "eV^-1", "pdf", "eV", "leading-order");
    meta.flags = flags;
    let approx = times.iter().map(|&time| 2.0 * two_packet_arrival_pdf(&spec, time)).collect();
    Ok(vec![exact, Curve::new(times, approx, meta)?])
}

fn wavelength_mode(w: &WavelengthSettings) -> Result<Vec<Curve>> {
    let n = w.points;
    let top = w.emax_ratio.log10();
    let x: Vec<f64> = (0..n).map(|i| 10f64.powf(top * i as f64 / (n - 1) as f64)).collect();
    let c = wavelength_curves(&x)?;
    let mut out = vec![c.standard, c.factor_two, c.threshold];
    for curve in &mut out {
        curve.meta.scalars.insert("eps_th".into(), w.eth);
    }
    Ok(out)
}

fn compare_mode(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    let spec = cfg.compare.as_ref().ok_or_else(|| missing(Mode::Compare, "a compare section or --alpha"))?;
    let mut p1 = event_distribution(ComparisonModel::Standard, spec)?;
    let mut p2 = event_distribution(ComparisonModel::Qm, spec)?;
    let d12 = statistical_distance(&p1, &p2)?;
    for c in [&mut p1, &mut p2] {
        c.meta.scalars.insert("alpha".into(), spec.alpha);
        c.meta.scalars.insert("d12".into(), d12);
    }
    Ok(vec![p1, p2])
}

/// Runs `mode`, or the mode named in the config. In strict mode any regime
/// flag aborts the run.
pub fn run_scenario(cfg: &ScenarioConfig, mode: Option<Mode>) -> Result<Vec<Curve>> {
    let mode = mode.or(cfg.run.mode).ok_or_else(|| RunError::Config("no mode given".into()))?;
    let curves = match mode {
        Mode::Curve => curve_mode(cfg)?,
        Mode::Mixed => mixed_mode(cfg)?,
        Mode::Channels => channels_mode(cfg)?,
        Mode::Toa => toa_mode(cfg.toa.as_ref().ok_or_else(|| missing(mode, "a toa section"))?)?,
        Mode::Wavelength => {
            wavelength_mode(cfg.wavelength.as_ref().ok_or_else(|| missing(mode, "a wavelength section or --eth"))?)?
        }
        Mode::Compare => compare_mode(cfg)?,
    };
    let flags = merge_flags(curves.iter().flat_map(|c| &c.meta.flags));
    if cfg.run.strict && !flags.is_empty() {
        return Err(RunError::Regime(flags));
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_keeps_first_of_each_kind() {
        let flags = [
            RegimeFlag::Dispersion { parameter: 0.2 },
            RegimeFlag::Dispersion { parameter: 0.3 },
            RegimeFlag::PhaseSpread { pair: (0, 1), bound: 0.5 },
            RegimeFlag::PhaseSpread { pair: (0, 2), bound: 0.5 },
            RegimeFlag::PhaseSpread { pair: (0, 1), bound: 0.9 },
        ];
        let m = merge_flags(&flags);
        assert_eq!(m, vec![flags[0].clone(), flags[2].clone(), flags[3].clone()]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(String::new()).exit_code(), 1);
        assert_eq!(RunError::Engine(Error::InvalidInput(String::new())).exit_code(), 1);
        assert_eq!(RunError::Engine(Error::NonConvergent(String::new())).exit_code(), 2);
        assert_eq!(RunError::Engine(Error::RegimeViolation(String::new())).exit_code(), 3);
        assert_eq!(RunError::Regime(Vec::new()).exit_code(), 3);
    }

    #[test]
    fn wavelength_grid_starts_at_threshold() {
        let w = crate::config::wavelength_settings(1e6, 10.0, 101).unwrap();
        let c = wavelength_mode(&w).unwrap();
        assert_eq!(c[0].x[0], 1.0);
        assert!((c[2].x[100] - 10.0).abs() < 1e-12);
        assert!((c[2].y[0] - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
