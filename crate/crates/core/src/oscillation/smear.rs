use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::{push_unique, RegimeFlag};

/// Windows wider than this fraction of the smallest grid coordinate are
/// flagged.
const WIDE_LIMIT: f64 = 0.1;

/// Probabilities on a baseline x momentum grid; `values[m][l]` belongs to
/// `momenta[m]` and `baselines[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearedGrid {
    pub baselines: Vec<f64>,
    pub momenta: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub flags: Vec<RegimeFlag>,
}

/// Averages a grid of probabilities over Gaussian uncertainties `delta` in the
/// baseline and `s_p` in the momentum. Windows are renormalized on the grid,
/// so zero widths give back the input.
pub fn sampling_smear(
    baselines: &[f64],
    momenta: &[f64],
    values: &[Vec<f64>],
    delta: f64,
    s_p: f64,
) -> Result<SmearedGrid> {
    if values.len() != momenta.len() || values.iter().any(|row| row.len() != baselines.len()) {
        return Err(Error::GridMismatch);
    }
    let wl = window_matrix(baselines, delta)?;
    let wp = window_matrix(momenta, s_p)?;
    let along_l: Vec<Vec<f64>> = values.iter().map(|row| apply(&wl, row)).collect();
    let mut out = vec![vec![0.0; baselines.len()]; momenta.len()];
    for l in 0..baselines.len() {
        let column: Vec<f64> = along_l.iter().map(|row| row[l]).collect();
        for (m, v) in apply(&wp, &column).into_iter().enumerate() {
            out[m][l] = v;
        }
    }
    let mut flags = Vec::new();
    for (grid, width) in [(baselines, delta), (momenta, s_p)] {
        if let Some(f) = wide_flag(grid, width) {
            push_unique(&mut flags, f);
        }
    }
    Ok(SmearedGrid { baselines: baselines.to_vec(), momenta: momenta.to_vec(), values: out, flags })
}

/// One-dimensional version of [`sampling_smear`].
pub fn smear_curve(x: &[f64], y: &[f64], width: f64) -> Result<(Vec<f64>, Vec<RegimeFlag>)> {
    if x.len() != y.len() {
        return Err(Error::GridMismatch);
    }
    let w = window_matrix(x, width)?;
    Ok((apply(&w, y), wide_flag(x, width).into_iter().collect()))
}

fn wide_flag(grid: &[f64], width: f64) -> Option<RegimeFlag> {
    let scale = grid.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let relative = width / scale;
    (relative > WIDE_LIMIT).then_some(RegimeFlag::WideSmearing { relative_width: relative })
}

/// Row-normalized Gaussian weights including trapezoid cell sizes. `None`
/// stands for the identity.
fn window_matrix(x: &[f64], width: f64) -> Result<Option<Vec<Vec<f64>>>> {
    if !(width >= 0.0 && width.is_finite()) {
        return Err(Error::InvalidInput(format!("smearing width {width} must be finite and >= 0")));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    if width == 0.0 || x.len() < 2 {
        return Ok(None);
    }
    let n = x.len();
    let cell: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<f64> =
                (0..n).map(|j| cell[j] * (-0.5 * ((x[j] - x[i]) / width).powi(2)).exp()).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|w| *w /= total);
            row
        })
        .collect();
    Ok(Some(rows))
}

fn apply(w: &Option<Vec<Vec<f64>>>, y: &[f64]) -> Vec<f64> {
    match w {
        None => y.to_vec(),
        Some(rows) => rows.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect(),
    }
}
