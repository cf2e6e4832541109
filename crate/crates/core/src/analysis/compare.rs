use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::{Curve, CurveMeta};
use crate::error::{Error, Result};
use crate::quad::simpson_weights;

/// Coefficient of the statistical distance, and hence its upper bound.
pub const MAX_DISTANCE: f64 = 8.0;

pub const MIN_GRID_POINTS: usize = 100;

/// Grid points required per local period of the fastest distribution.
pub const MIN_POINTS_PER_PERIOD: f64 = 10.0;

/// Points per period used by [`ComparisonSpec::resolved`].
const AUTO_POINTS_PER_PERIOD: f64 = 40.0;

/// Wavelength times mass splitting over energy, against E / eps_th.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavelengthCurves {
    /// 4 pi
    pub standard: Curve,
    /// 2 pi, the high-energy limit without threshold
    pub factor_two: Curve,
    /// 2 pi / (1 - eps_th / (2E))
    pub threshold: Curve,
}

pub fn wavelength_curves(e_over_eth: &[f64]) -> Result<WavelengthCurves> {
    if let Some(x) = e_over_eth.iter().find(|x| !(**x >= 1.0)) {
        return Err(Error::InvalidInput(format!("E / eps_th = {x} is below threshold")));
    }
    let make = |model: &str, f: &dyn Fn(f64) -> f64| {
        let y = e_over_eth.iter().map(|&x| f(x)).collect();
        Curve::new(e_over_eth.to_vec(), y, CurveMeta::new("E/eps_th", "", "lambda dm2/E", "", model))
    };
    Ok(WavelengthCurves {
        standard: make("standard", &|_| 4.0 * PI)?,
        factor_two: make("factor-two", &|_| 2.0 * PI)?,
        threshold: make("threshold", &|x| 2.0 * PI / (1.0 - 0.5 / x))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonModel {
    /// sin^2(alpha / x)
    Standard,
    /// sin^2(alpha (1 - 1/(2x)) / x)
    Qm,
}

impl ComparisonModel {
    fn phase(self, alpha: f64, x: f64) -> f64 {
        match self {
            ComparisonModel::Standard => alpha / x,
            ComparisonModel::Qm => alpha * (1.0 - 0.5 / x) / x,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ComparisonModel::Standard => "standard",
            ComparisonModel::Qm => "qm",
        }
    }
}

/// alpha = mu^2 L / (2 eps_th) on a uniform grid of x = E / eps_th.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub alpha: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub grid_points: usize,
}

impl ComparisonSpec {
    pub fn new(alpha: f64, x_lo: f64, x_hi: f64, grid_points: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must be > 0")));
        }
        if !(x_lo >= 1.0 && x_hi > x_lo && x_hi.is_finite()) {
            return Err(Error::InvalidInput(format!("x range [{x_lo}, {x_hi}] must satisfy 1 <= x_lo < x_hi")));
        }
        if grid_points < MIN_GRID_POINTS {
            return Err(Error::InvalidInput(format!("{grid_points} grid points, at least {MIN_GRID_POINTS} needed")));
        }
        Ok(Self { alpha, x_lo, x_hi, grid_points })
    }

    /// Odd grid with 40 points over the shortest local period.
    pub fn resolved(alpha: f64, x_lo: f64, x_hi: f64) -> Result<Self> {
        let probe = Self::new(alpha, x_lo, x_hi, MIN_GRID_POINTS)?;
        let h = probe.shortest_period() / AUTO_POINTS_PER_PERIOD;
        let n = (((x_hi - x_lo) / h).ceil() as usize + 1).max(MIN_GRID_POINTS + 1) | 1;
        Self::new(alpha, x_lo, x_hi, n)
    }

    /// Both phases change at most at the rate alpha / x^2, and sin^2 repeats
    /// when its argument moves by pi.
    pub fn shortest_period(&self) -> f64 {
        PI * self.x_lo * self.x_lo / self.alpha
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n).map(|i| self.x_lo + (self.x_hi - self.x_lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.grid_points - 1) as f64
    }
}

/// Event-count distribution of a model, scaled to unit Simpson area on the
/// grid.
pub fn event_distribution(model: ComparisonModel, spec: &ComparisonSpec) -> Result<Curve> {
    let per_period = spec.shortest_period() / spec.spacing();
    if per_period < MIN_POINTS_PER_PERIOD {
        return Err(Error::GridTooCoarse(format!(
            "{per_period:.2} points per period for alpha = {}, at least {MIN_POINTS_PER_PERIOD} needed",
            spec.alpha
        )));
    }
    let x = spec.grid();
    let y = x.iter().map(|&x| model.phase(spec.alpha, x).sin().powi(2)).collect();
    let meta = CurveMeta::new("E/eps_th", "", "p", "", model.tag());
    Curve::new(x, y, meta)?.normalized()
}

/// 8 (1 - int sqrt(p1 p2) dx), with both inputs rescaled to unit area on
/// their common grid so identical curves give exactly 0.
pub fn statistical_distance(p1: &Curve, p2: &Curve) -> Result<f64> {
    if p1.x != p2.x {
        return Err(Error::GridMismatch);
    }
    if p1.y.iter().chain(&p2.y).any(|v| *v < 0.0) {
        return Err(Error::InvalidInput("distributions must be nonnegative".into()));
    }
    let w = simpson_weights(&p1.x);
    let dot = |f: &dyn Fn(usize) -> f64| -> f64 { w.iter().enumerate().map(|(i, wi)| wi * f(i)).sum() };
    let a1 = dot(&|i| p1.y[i]);
    let a2 = dot(&|i| p2.y[i]);
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::InvalidInput("distributions must have positive area".into()));
    }
    let overlap = dot(&|i| (p1.y[i] * p2.y[i]).sqrt()) / (a1 * a2).sqrt();
    Ok((MAX_DISTANCE * (1.0 - overlap)).clamp(0.0, MAX_DISTANCE))
}
