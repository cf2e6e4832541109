//! Scenario files: TOML, or JSON with the same schema. Every physical
//! quantity is a string carrying its unit.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use osc_povm::analysis::ComparisonSpec;
use osc_povm::meas_models::TwoPacketSpec;
use osc_povm::oscillation::{
    ClosedMode, Engine, MixedInitialState, MixtureComponent, NumericOptions, WeightedChannel,
};
use osc_povm::types::{DetectionChannel, Eigenstate, MassSpectrum, MixingMatrix, PlaneRotation, WavePacketState};
use osc_povm::AmplitudeModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{parse_quantity, Kind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Toa,
    Curve,
    Wavelength,
    Compare,
    Mixed,
    Channels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    #[default]
    ClosedGeneral,
    ClosedSimplified,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {constraint}")]
pub struct ValidationError {
    pub field: String,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}", list(.0))]
    Validation(Vec<ValidationError>),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn list(errors: &[ValidationError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
}

/// Text quantity, or a bare number that is rejected for lacking a unit.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Qty {
    Text(String),
    Number(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spectrum: Option<RawSpectrum>,
    mixing: Option<RawMixing>,
    state: Option<RawState>,
    #[serde(default)]
    channel: Vec<RawChannel>,
    geometry: Option<RawGeometry>,
    #[serde(default)]
    run: RawRun,
    mixed: Option<RawMixed>,
    toa: Option<RawToa>,
    wavelength: Option<RawWavelength>,
    compare: Option<RawCompare>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Convention {
    #[default]
    EqualP,
    EqualE,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    masses: Vec<Qty>,
    #[serde(default)]
    convention: Convention,
    momentum: Option<Qty>,
    energy: Option<Qty>,
    momenta: Option<Vec<Qty>>,
    decay_rates: Option<Vec<Qty>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotation {
    i: usize,
    j: usize,
    angle: Qty,
    phase: Option<Qty>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPmns {
    theta12: Qty,
    theta13: Qty,
    theta23: Qty,
    delta_cp: Qty,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixing {
    theta: Option<Qty>,
    rotations: Option<Vec<RawRotation>>,
    pmns: Option<RawPmns>,
    /// Rows of [re, im] pairs.
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    sigma: Qty,
    #[serde(default)]
    production_flavor: usize,
    center: Option<Qty>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    epsilon_th: Qty,
    product_masses: Vec<Qty>,
    delta: Qty,
    tau_dec: Qty,
    detection_flavor: usize,
    #[serde(default = "one")]
    weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: Qty,
    stop: Qty,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    baseline: Option<Qty>,
    baselines: Option<Vec<Qty>>,
    range: Option<RawRange>,
    horizon: Option<Qty>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    mode: Option<Mode>,
    #[serde(default)]
    engine: EngineChoice,
    format: Option<Format>,
    #[serde(default)]
    strict: bool,
    #[serde(default)]
    fit: bool,
    smear_width: Option<Qty>,
    rel_tol: Option<f64>,
    amplitude: Option<AmplitudeModel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixed {
    positions: Vec<Qty>,
    momenta: Option<Vec<Qty>>,
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToa {
    mass: Qty,
    pbar: Qty,
    pbar2: Option<Qty>,
    distance: Qty,
    width: Qty,
    points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWavelength {
    eth: Qty,
    emax_ratio: f64,
    points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    alpha: f64,
    x_lo: Option<f64>,
    x_hi: Option<f64>,
}

/// Spectrum, mixing, initial state and detection channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub mixing: MixingMatrix,
    pub state: WavePacketState,
    pub channels: Vec<WeightedChannel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub baselines: Vec<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub mode: Option<Mode>,
    pub engine: Engine,
    pub format: Option<Format>,
    pub strict: bool,
    pub fit: bool,
    pub smear_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaSettings {
    pub spec: TwoPacketSpec,
    /// False for a single Gaussian at pbar1.
    pub two_packet: bool,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthSettings {
    pub eth: f64,
    pub emax_ratio: f64,
    pub points: usize,
}

pub const DEFAULT_WAVELENGTH_POINTS: usize = 1000;
pub const DEFAULT_TOA_POINTS: usize = 801;
pub const DEFAULT_X_RANGE: (f64, f64) = (1.0, 10.0);

/// A fully validated scenario. Sections a mode does not use may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub physics: Option<Physics>,
    pub geometry: Option<Geometry>,
    pub run: RunSettings,
    pub mixed: Option<MixedInitialState>,
    pub toa: Option<ToaSettings>,
    pub wavelength: Option<WavelengthSettings>,
    pub compare: Option<ComparisonSpec>,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Toa => "toa",
            Mode::Curve => "curve",
            Mode::Wavelength => "wavelength",
            Mode::Compare => "compare",
            Mode::Mixed => "mixed",
            Mode::Channels => "channels",
        };
        f.write_str(s)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_toml(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    validate(raw)
}

pub fn parse_json(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse { line: e.line(), message: e.to_string() })?;
    validate(raw)
}

/// JSON for a .json extension, TOML otherwise.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_json(&text),
        _ => parse_toml(&text),
    }
}

/// Collects every problem instead of stopping at the first.
#[derive(Default)]
struct Checker {
    errors: Vec<ValidationError>,
}

impl Checker {
    fn fail(&mut self, field: &str, constraint: impl Into<String>) {
        self.errors.push(ValidationError { field: field.into(), constraint: constraint.into() });
    }

    fn qty(&mut self, field: &str, q: &Qty, kind: Kind) -> Option<f64> {
        let parsed = match q {
            Qty::Text(t) => parse_quantity(t, kind),
            Qty::Number(v) => Err(format!("{v} has no unit; expected {}", kind.describe())),
        };
        parsed.map_err(|m| self.fail(field, m)).ok()
    }

    fn positive(&mut self, field: &str, q: &Qty, kind: Kind) -> Option<f64> {
        let v = self.qty(field, q, kind)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.fail(field, "positivity: must be > 0");
            None
        }
    }

    fn non_negative(&mut self, field: &str, q: &Qty, kind: Kind) -> Option<f64> {
        let v = self.qty(field, q, kind)?;
        if v >= 0.0 {
            Some(v)
        } else {
            self.fail(field, "must be >= 0");
            None
        }
    }

    fn list(&mut self, field: &str, qs: &[Qty], kind: Kind, positive: bool) -> Option<Vec<f64>> {
        let out: Vec<Option<f64>> = qs
            .iter()
            .enumerate()
            .map(|(k, q)| {
                let name = format!("{field}[{k}]");
                if positive {
                    self.positive(&name, q, kind)
                } else {
                    self.non_negative(&name, q, kind)
                }
            })
            .collect();
        out.into_iter().collect()
    }

    fn core<T>(&mut self, field: &str, r: osc_povm::Result<T>) -> Option<T> {
        r.map_err(|e| self.fail(field, e.to_string())).ok()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn spectrum(c: &mut Checker, s: &RawSpectrum) -> Option<MassSpectrum> {
    if s.masses.is_empty() {
        c.fail("spectrum.masses", "at least one mass is required");
        return None;
    }
    let masses = c.list("spectrum.masses", &s.masses, Kind::Energy, false);
    let built = match s.convention {
        Convention::EqualP => {
            let p = match &s.momentum {
                Some(q) => c.positive("spectrum.momentum", q, Kind::Energy),
                None => {
                    c.fail("spectrum.momentum", "required by the equal-p convention");
                    None
                }
            };
            let (m, p) = (masses?, p?);
            c.core("spectrum", MassSpectrum::equal_momentum(&m, p))
        }
        Convention::EqualE => {
            let e = match &s.energy {
                Some(q) => c.positive("spectrum.energy", q, Kind::Energy),
                None => {
                    c.fail("spectrum.energy", "required by the equal-E convention");
                    None
                }
            };
            let (m, e) = (masses?, e?);
            c.core("spectrum", MassSpectrum::equal_energy(&m, e))
        }
        Convention::Explicit => {
            let p = match &s.momenta {
                Some(qs) if qs.len() == s.masses.len() => c.list("spectrum.momenta", qs, Kind::Energy, true),
                _ => {
                    c.fail("spectrum.momenta", "one momentum per mass is required by the explicit convention");
                    None
                }
            };
            let (m, p) = (masses?, p?);
            let states = m.iter().zip(&p).map(|(&m, &p)| Eigenstate::stable(m, p)).collect();
            c.core("spectrum", MassSpectrum::new(states))
        }
    }?;
    match &s.decay_rates {
        None => Some(built),
        Some(qs) if qs.len() != s.masses.len() => {
            c.fail("spectrum.decay_rates", "one rate per mass is required");
            None
        }
        Some(qs) => {
            let rates = c.list("spectrum.decay_rates", qs, Kind::Energy, false)?;
            c.core("spectrum.decay_rates", built.with_decay_rates(&rates))
        }
    }
}

fn mixing(c: &mut Checker, m: &RawMixing, n: Option<usize>) -> Option<MixingMatrix> {
    let given = [m.theta.is_some(), m.rotations.is_some(), m.pmns.is_some(), m.matrix.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        c.fail("mixing", "exactly one of theta, rotations, pmns or matrix is required");
        return None;
    }
    let u = if let Some(q) = &m.theta {
        MixingMatrix::rotation(c.qty("mixing.theta", q, Kind::Angle)?)
    } else if let Some(rs) = &m.rotations {
        let dim = n.unwrap_or_else(|| rs.iter().map(|r| r.i.max(r.j) + 1).max().unwrap_or(1));
        let mut out = Vec::new();
        for (k, r) in rs.iter().enumerate() {
            let angle = c.qty(&format!("mixing.rotations[{k}].angle"), &r.angle, Kind::Angle);
            let phase = match &r.phase {
                Some(q) => c.qty(&format!("mixing.rotations[{k}].phase"), q, Kind::Angle),
                None => Some(0.0),
            };
            if let (Some(angle), Some(phase)) = (angle, phase) {
                out.push(PlaneRotation { i: r.i, j: r.j, angle, phase });
            }
        }
        if out.len() != rs.len() {
            return None;
        }
        c.core("mixing.rotations", MixingMatrix::from_rotations(dim, &out))?
    } else if let Some(p) = &m.pmns {
        let t12 = c.qty("mixing.pmns.theta12", &p.theta12, Kind::Angle);
        let t13 = c.qty("mixing.pmns.theta13", &p.theta13, Kind::Angle);
        let t23 = c.qty("mixing.pmns.theta23", &p.theta23, Kind::Angle);
        let d = c.qty("mixing.pmns.delta_cp", &p.delta_cp, Kind::Angle);
        MixingMatrix::pmns(t12?, t13?, t23?, d?)
    } else {
        let rows: Vec<Vec<Complex64>> =
            m.matrix.as_ref()?.iter().map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect();
        if rows.iter().any(|r| r.len() != rows.len()) {
            c.fail("mixing.matrix", "must be square");
            return None;
        }
        c.core("mixing.matrix", MixingMatrix::from_rows(&rows))?
    };
    if let Some(n) = n {
        if u.dim() != n {
            c.fail("mixing", format!("matrix is {0}x{0} but the spectrum has {n} masses", u.dim()));
            return None;
        }
    }
    Some(u)
}

fn channel(c: &mut Checker, k: usize, ch: &RawChannel, n: Option<usize>) -> Option<WeightedChannel> {
    let f = |name: &str| format!("channel[{k}].{name}");
    let eps = c.qty(&f("epsilon_th"), &ch.epsilon_th, Kind::Energy);
    let masses = c.list(&f("product_masses"), &ch.product_masses, Kind::Energy, true);
    let delta = c.positive(&f("delta"), &ch.delta, Kind::InverseEnergy);
    let tau = c.positive(&f("tau_dec"), &ch.tau_dec, Kind::InverseEnergy);
    if !(ch.weight >= 0.0 && ch.weight.is_finite()) {
        c.fail(&f("weight"), "must be finite and >= 0");
    }
    if n.is_some_and(|n| ch.detection_flavor >= n) {
        c.fail(&f("detection_flavor"), format!("must be below the number of flavors {}", n.unwrap()));
    }
    let built = c.core(&f("product_masses"), DetectionChannel::new(eps?, masses?, delta?, tau?, ch.detection_flavor))?;
    Some(WeightedChannel { channel: built, weight: ch.weight })
}

fn geometry(c: &mut Checker, g: &RawGeometry) -> Option<Geometry> {
    let given = [g.baseline.is_some(), g.baselines.is_some(), g.range.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        c.fail("geometry", "exactly one of baseline, baselines or range is required");
        return None;
    }
    let horizon = match &g.horizon {
        Some(q) => Some(c.positive("geometry.horizon", q, Kind::InverseEnergy)?),
        None => None,
    };
    let baselines = if let Some(q) = &g.baseline {
        vec![c.positive("geometry.baseline", q, Kind::InverseEnergy)?]
    } else if let Some(qs) = &g.baselines {
        if qs.is_empty() {
            c.fail("geometry.baselines", "must not be empty");
        }
        c.list("geometry.baselines", qs, Kind::InverseEnergy, true)?
    } else {
        let r = g.range.as_ref()?;
        let lo = c.positive("geometry.range.start", &r.start, Kind::InverseEnergy);
        let hi = c.positive("geometry.range.stop", &r.stop, Kind::InverseEnergy);
        if r.points < 2 {
            c.fail("geometry.range.points", "at least 2 points are required");
            return None;
        }
        let (lo, hi) = (lo?, hi?);
        if hi <= lo {
            c.fail("geometry.range", "stop must exceed start");
            return None;
        }
        linspace(lo, hi, r.points)
    };
    Some(Geometry { baselines, horizon })
}

fn run_settings(c: &mut Checker, r: &RawRun) -> Option<RunSettings> {
    let numeric = r.rel_tol.is_some() || r.amplitude.is_some();
    if numeric && r.engine != EngineChoice::Numeric {
        c.fail("run", "rel_tol and amplitude apply to the numeric engine only");
    }
    let engine = match r.engine {
        EngineChoice::ClosedGeneral => Engine::Closed(ClosedMode::General),
        EngineChoice::ClosedSimplified => Engine::Closed(ClosedMode::Simplified),
        EngineChoice::Numeric => {
            let mut o = NumericOptions::default();
            if let Some(t) = r.rel_tol {
                if !(t > 0.0 && t < 1.0) {
                    c.fail("run.rel_tol", "must lie in (0, 1)");
                }
                o.rel_tol = t;
            }
            if let Some(a) = r.amplitude {
                o.amplitude = a;
            }
            Engine::Numeric(o)
        }
    };
    let smear_width = match &r.smear_width {
        Some(q) => Some(c.non_negative("run.smear_width", q, Kind::InverseEnergy)?),
        None => None,
    };
    Some(RunSettings { mode: r.mode, engine, format: r.format, strict: r.strict, fit: r.fit, smear_width })
}

fn mixed(c: &mut Checker, m: &RawMixed, physics: Option<&Physics>) -> Option<MixedInitialState> {
    let n = m.positions.len();
    if n == 0 {
        c.fail("mixed.positions", "must not be empty");
        return None;
    }
    let q: Vec<Option<f64>> = m
        .positions
        .iter()
        .enumerate()
        .map(|(k, p)| c.qty(&format!("mixed.positions[{k}]"), p, Kind::InverseEnergy))
        .collect();
    let p = match &m.momenta {
        Some(ps) if ps.len() != n => {
            c.fail("mixed.momenta", "one momentum per position is required");
            None
        }
        Some(ps) => c.list("mixed.momenta", ps, Kind::Energy, true),
        None => physics.map(|ph| vec![ph.state.spectrum.mean_momentum(); n]),
    };
    let w = match &m.weights {
        Some(ws) if ws.len() != n => {
            c.fail("mixed.weights", "one weight per position is required");
            None
        }
        Some(ws) => Some(ws.clone()),
        None => Some(vec![1.0 / n as f64; n]),
    };
    let physics = match physics {
        Some(ph) => ph,
        None => {
            c.fail("mixed", "needs the spectrum, mixing, state and channel sections");
            return None;
        }
    };
    let q: Vec<f64> = q.into_iter().collect::<Option<_>>()?;
    let comps = q.iter().zip(p?).zip(w?).map(|((&q, p), weight)| MixtureComponent { q, p, weight }).collect();
    c.core("mixed", MixedInitialState::new(physics.state.clone(), comps))
}

fn toa(c: &mut Checker, t: &RawToa) -> Option<ToaSettings> {
    let mass = c.positive("toa.mass", &t.mass, Kind::Energy);
    let p1 = c.positive("toa.pbar", &t.pbar, Kind::Energy);
    let p2 = match &t.pbar2 {
        Some(q) => c.positive("toa.pbar2", q, Kind::Energy),
        None => p1,
    };
    let l = c.non_negative("toa.distance", &t.distance, Kind::InverseEnergy);
    let a = c.positive("toa.width", &t.width, Kind::InverseEnergy);
    let points = t.points.unwrap_or(DEFAULT_TOA_POINTS);
    if points < 3 {
        c.fail("toa.points", "at least 3 points are required");
    }
    let spec = c.core("toa", TwoPacketSpec::new(mass?, l?, a?, p1?, p2?))?;
    Some(ToaSettings { spec, two_packet: t.pbar2.is_some(), points })
}

pub fn wavelength_settings(eth: f64, emax_ratio: f64, points: usize) -> Result<WavelengthSettings, ValidationError> {
    let fail = |field: &str, constraint: &str| ValidationError { field: field.into(), constraint: constraint.into() };
    if !(eth > 0.0 && eth.is_finite()) {
        return Err(fail("wavelength.eth", "positivity: must be > 0"));
    }
    if !(emax_ratio > 1.0 && emax_ratio.is_finite()) {
        return Err(fail("wavelength.emax_ratio", "must exceed 1"));
    }
    if points < 2 {
        return Err(fail("wavelength.points", "at least 2 points are required"));
    }
    Ok(WavelengthSettings { eth, emax_ratio, points })
}

fn wavelength(c: &mut Checker, w: &RawWavelength) -> Option<WavelengthSettings> {
    let eth = c.qty("wavelength.eth", &w.eth, Kind::Energy)?;
    wavelength_settings(eth, w.emax_ratio, w.points.unwrap_or(DEFAULT_WAVELENGTH_POINTS))
        .map_err(|e| c.errors.push(e))
        .ok()
}

fn compare(c: &mut Checker, r: &RawCompare) -> Option<ComparisonSpec> {
    let lo = r.x_lo.unwrap_or(DEFAULT_X_RANGE.0);
    let hi = r.x_hi.unwrap_or(DEFAULT_X_RANGE.1);
    c.core("compare", ComparisonSpec::resolved(r.alpha, lo, hi))
}

fn validate(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let mut c = Checker::default();
    let spec = raw.spectrum.as_ref().and_then(|s| spectrum(&mut c, s));
    let n = raw.spectrum.as_ref().map(|s| s.masses.len());
    let u = raw.mixing.as_ref().and_then(|m| mixing(&mut c, m, n));
    let channels: Vec<Option<WeightedChannel>> =
        raw.channel.iter().enumerate().map(|(k, ch)| channel(&mut c, k, ch, n)).collect();
    let state = raw.state.as_ref().and_then(|s| {
        let sigma = c.positive("state.sigma", &s.sigma, Kind::InverseEnergy);
        let center = match &s.center {
            Some(q) => c.qty("state.center", q, Kind::InverseEnergy),
            None => Some(0.0),
        };
        if n.is_some_and(|n| s.production_flavor >= n) {
            c.fail("state.production_flavor", "must be below the number of flavors");
            return None;
        }
        let built = c.core("state", WavePacketState::new(sigma?, s.production_flavor, spec.clone()?))?;
        Some(built.centered_at(center?))
    });

    let any_physics = raw.spectrum.is_some() || raw.mixing.is_some() || raw.state.is_some() || !raw.channel.is_empty();
    let mut physics = None;
    if any_physics {
        for (name, present) in [
            ("spectrum", raw.spectrum.is_some()),
            ("mixing", raw.mixing.is_some()),
            ("state", raw.state.is_some()),
            ("channel", !raw.channel.is_empty()),
        ] {
            if !present {
                c.fail(name, "section is required alongside the other physics sections");
            }
        }
        let channels: Option<Vec<WeightedChannel>> = channels.into_iter().collect();
        if let (Some(mixing), Some(state), Some(channels)) = (u, state, channels) {
            if !channels.is_empty() {
                physics = Some(Physics { mixing, state, channels });
            }
        }
    }

    let geometry = raw.geometry.as_ref().and_then(|g| geometry(&mut c, g));
    let run = run_settings(&mut c, &raw.run);
    let mixed = raw.mixed.as_ref().and_then(|m| mixed(&mut c, m, physics.as_ref()));
    let toa = raw.toa.as_ref().and_then(|t| toa(&mut c, t));
    let wavelength = raw.wavelength.as_ref().and_then(|w| wavelength(&mut c, w));
    let compare = raw.compare.as_ref().and_then(|r| compare(&mut c, r));
    if !c.errors.is_empty() {
        return Err(ConfigError::Validation(c.errors));
    }
    Ok(ScenarioConfig {
        physics,
        geometry,
        run: run.expect("run settings validated"),
        mixed,
        toa,
        wavelength,
        compare,
    })
}
