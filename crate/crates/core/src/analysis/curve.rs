use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::RegimeFlag;
use crate::quad::simpson;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveMeta {
    pub x_label: String,
    pub y_label: String,
    pub x_unit: String,
    pub y_unit: String,
    /// Which model or formula produced the curve.
    pub model: String,
    /// Set once the curve is scaled to unit area over [lo, hi].
    pub normalization: Option<(f64, f64)>,
    pub flags: Vec<RegimeFlag>,
    /// Derived numbers reported alongside the curve, such as a fitted
    /// wavenumber.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scalars: BTreeMap<String, f64>,
}

impl CurveMeta {
    pub fn new(x_label: &str, x_unit: &str, y_label: &str, y_unit: &str, model: &str) -> Self {
        Self {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_unit: x_unit.into(),
            y_unit: y_unit.into(),
            model: model.into(),
            normalization: None,
            flags: Vec::new(),
            scalars: BTreeMap::new(),
        }
    }
}

/// A sampled series with its labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub meta: CurveMeta,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("curve has {} x values and {} y values", x.len(), y.len())));
        }
        if let Some(i) = x.iter().zip(&y).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite curve point at index {i}")));
        }
        Ok(Self { x, y, meta })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Simpson integral over the stored grid.
    pub fn integral(&self) -> f64 {
        simpson(&self.x, &self.y)
    }

    /// Copy scaled to unit Simpson area on its own grid.
    pub fn normalized(&self) -> Result<Curve> {
        let area = self.integral();
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::InvalidInput(format!("cannot normalize a curve of area {area}")));
        }
        let mut out = self.clone();
        out.y.iter_mut().for_each(|v| *v /= area);
        out.meta.normalization = Some((self.x[0], self.x[self.len() - 1]));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_nan() {
        assert!(Curve::new(vec![1.0, 2.0], vec![1.0], CurveMeta::default()).is_err());
        assert!(Curve::new(vec![1.0, 2.0], vec![1.0, f64::NAN], CurveMeta::default()).is_err());
    }

    #[test]
    fn normalized_has_unit_area() {
        let x: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let y = x.iter().map(|v| 3.0 * v * v).collect();
        let c = Curve::new(x, y, CurveMeta::default()).unwrap().normalized().unwrap();
        assert!((c.integral() - 1.0).abs() < 1e-14);
        assert_eq!(c.meta.normalization, Some((0.0, 1.0)));
    }

    #[test]
    fn serde_round_trip() {
        let c = Curve::new(vec![0.0, 1.0], vec![2.0, 3.0], CurveMeta::new("L", "m", "p", "", "closed")).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Curve>(&s).unwrap(), c);
    }
}
