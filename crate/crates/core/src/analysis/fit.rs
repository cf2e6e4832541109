use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::spectrum::peak_frequency;
use crate::error::{Error, Result};

/// Fits whose RMS residual exceeds this fraction of the fitted amplitude are
/// rejected.
pub const MAX_RELATIVE_RESIDUAL: f64 = 0.1;

/// Fewer periods than this over the curve cannot seed the fit reliably.
const MIN_PERIODS: f64 = 2.0;

const MAX_ITERATIONS: usize = 500;

/// Best fit of a + b e^{-c (L - L0)} cos(k L + phi), L0 the first grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavenumberFit {
    pub k: f64,
    /// b / a at L0.
    pub visibility: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub decay: f64,
    /// Phase at L = 0, in (-pi, pi].
    pub phase: f64,
    /// RMS residual over b.
    pub residual: f64,
}

/// Damped-cosine least squares seeded by the strongest FFT component.
pub fn extract_wavenumber(curve: &Curve) -> Result<WavenumberFit> {
    let n = curve.len();
    if n < 8 {
        return Err(Error::FitFailure(format!("{n} points are too few")));
    }
    if curve.x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("curve abscissae must increase".into()));
    }
    let x0 = curve.x[0];
    let span = curve.x[n - 1] - x0;
    let t: Vec<f64> = curve.x.iter().map(|x| x - x0).collect();
    let scale = curve.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::FitFailure("curve is identically zero".into()));
    }
    let y: Vec<f64> = curve.y.iter().map(|v| v / scale).collect();

    let h = span / (n - 1) as f64;
    let uniform: Vec<f64> = (0..n).map(|i| interpolate(&t, &y, i as f64 * h)).collect();
    let k0 = peak_frequency(h, &uniform, 8, 1.5 * 2.0 * PI / span)?;
    let (a0, b0, phi0) = linear_seed(&t, &y, k0);
    let mut p = [a0, b0, 0.0, k0, phi0];
    let cost0 = cost(&t, &y, &p);
    p = levenberg_marquardt(&t, &y, p);
    if !(cost(&t, &y, &p) <= cost0) || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("least squares diverged".into()));
    }
    let [a, mut b, c, mut k, mut phi] = p;
    if k < 0.0 {
        k = -k;
        phi = -phi;
    }
    if b < 0.0 {
        b = -b;
        phi += PI;
    }
    let periods = k * span / (2.0 * PI);
    if periods < MIN_PERIODS {
        return Err(Error::FitFailure(format!("curve spans {periods:.2} periods")));
    }
    let residual = (cost(&t, &y, &[a, b, c, k, phi]) * 2.0 / n as f64).sqrt() / b;
    if !(residual <= MAX_RELATIVE_RESIDUAL) {
        return Err(Error::FitFailure(format!("RMS residual is {residual:.3} of the amplitude")));
    }
    Ok(WavenumberFit {
        k,
        visibility: b / a,
        offset: a * scale,
        amplitude: b * scale,
        decay: c,
        phase: wrap(phi - k * x0),
        residual,
    })
}

fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn interpolate(t: &[f64], y: &[f64], at: f64) -> f64 {
    let i = t.partition_point(|v| *v <= at).clamp(1, t.len() - 1);
    let w = (at - t[i - 1]) / (t[i] - t[i - 1]);
    y[i - 1] + w * (y[i] - y[i - 1])
}

/// Offset, amplitude and phase at fixed k by linear least squares.
fn linear_seed(t: &[f64], y: &[f64], k: f64) -> (f64, f64, f64) {
    let mut m = Matrix3::zeros();
    let mut r = Vector3::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let basis = Vector3::new(1.0, (k * ti).cos(), (k * ti).sin());
        m += basis * basis.transpose();
        r += basis * yi;
    }
    let s = m.lu().solve(&r).unwrap_or_else(|| Vector3::new(0.0, 1.0, 0.0));
    (s[0], s[1].hypot(s[2]), (-s[2]).atan2(s[1]))
}

fn model(t: f64, p: &[f64; 5]) -> f64 {
    p[0] + p[1] * (-p[2] * t).exp() * (p[3] * t + p[4]).cos()
}

fn cost(t: &[f64], y: &[f64], p: &[f64; 5]) -> f64 {
    0.5 * t.iter().zip(y).map(|(&ti, &yi)| (model(ti, p) - yi).powi(2)).sum::<f64>()
}

fn levenberg_marquardt(t: &[f64], y: &[f64], mut p: [f64; 5]) -> [f64; 5] {
    let n = t.len();
    let mut lambda = 1e-3;
    let mut current = cost(t, y, &p);
    for _ in 0..MAX_ITERATIONS {
        let mut jac = DMatrix::zeros(n, 5);
        let mut res = DVector::zeros(n);
        for (row, (&ti, &yi)) in t.iter().zip(y).enumerate() {
            let env = (-p[2] * ti).exp();
            let (s, c) = (p[3] * ti + p[4]).sin_cos();
            jac[(row, 0)] = 1.0;
            jac[(row, 1)] = env * c;
            jac[(row, 2)] = -ti * p[1] * env * c;
            jac[(row, 3)] = -ti * p[1] * env * s;
            jac[(row, 4)] = -p[1] * env * s;
            res[row] = model(ti, &p) - yi;
        }
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &res;
        let mut improved = false;
        while lambda < 1e16 {
            let mut lhs = jtj.clone();
            for d in 0..5 {
                lhs[(d, d)] += lambda * jtj[(d, d)].max(1e-30);
            }
            let Some(step) = lhs.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p;
            for d in 0..5 {
                trial[d] += step[d];
            }
            let c = cost(t, y, &trial);
            if c < current {
                let gain = (current - c) / current.max(f64::MIN_POSITIVE);
                p = trial;
                current = c;
                lambda = (lambda / 3.0).max(1e-12);
                improved = gain > 1e-15;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    p
}
