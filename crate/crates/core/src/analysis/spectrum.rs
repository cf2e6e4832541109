use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One-sided |DFT| / n of a real series; bin m has angular frequency
/// 2 pi m / (n h) for sample spacing h.
pub fn amplitude_spectrum(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm() / n as f64).collect()
}

/// Angular frequency of the strongest component of a uniformly sampled
/// series, after removing the mean. The series is zero-padded by `pad` and
/// the peak refined by a parabola through the three top bins. Frequencies
/// below `min_omega` are ignored.
pub fn peak_frequency(spacing: f64, y: &[f64], pad: usize, min_omega: f64) -> Result<f64> {
    if y.len() < 4 || !(spacing > 0.0) {
        return Err(Error::InvalidInput("need at least 4 uniformly spaced samples".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let n = y.len() * pad.max(1);
    let mut padded: Vec<f64> = y.iter().map(|v| v - mean).collect();
    padded.resize(n, 0.0);
    let spec = amplitude_spectrum(&padded);
    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    let first = ((min_omega / d_omega).ceil() as usize).max(1);
    if first + 1 >= spec.len() {
        return Err(Error::InvalidInput("frequency floor is above the Nyquist limit".into()));
    }
    let (m, _) = spec
        .iter()
        .enumerate()
        .skip(first)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidInput("empty spectrum".into()))?;
    let shift = if m > 0 && m + 1 < spec.len() {
        let (a, b, c) = (spec[m - 1], spec[m], spec[m + 1]);
        let denom = a - 2.0 * b + c;
        if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 }
    } else {
        0.0
    };
    Ok((m as f64 + shift) * d_omega)
}
