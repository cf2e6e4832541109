//! Adaptive Gauss-Kronrod integration for real and complex integrands, plus
//! composite Simpson rules on stored (possibly non-uniform) grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: error estimate {error:e} exceeds tolerance {tolerance:e} after {intervals} intervals")]
    NotConverged { error: f64, tolerance: f64, intervals: usize },

    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },

    #[error("invalid integration range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },
}

/// Values that can be integrated: closed under addition and real scaling,
/// with a norm for error control.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn norm(self) -> f64;
    fn is_finite(self) -> bool;
}

impl QuadValue for f64 {
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl QuadValue for Complex64 {
    fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal panels the range (or each breakpoint segment) is cut
    /// into before adaptation starts.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 2000, initial_panels: 1 }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208656877791,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// 10-point Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    magnitude: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        e = res_asc * (200.0 * e / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Kronrod rule on [a, b] with the embedded 10-point Gauss
/// error estimate.
pub fn gk21<T, F>(f: &F, a: f64, b: f64) -> Result<(T, f64), QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    gk21_full(f, a, b).map(|(v, e, _)| (v, e))
}

// Also returns the integral of |f| over the segment.
fn gk21_full<T, F>(f: &F, a: f64, b: f64) -> Result<(T, f64, f64), QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = T::default();
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let err = ((res_k - res_g) * half).norm();
    Ok((res_k * half, rescale_error(err, res_abs * scale, res_asc * scale), res_abs * scale))
}

/// Globally adaptive integration of `f` over [a, b].
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate<T>, QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_breakpoints(f, &[a, b], opts)
}

/// Adaptive integration over [points[0], points[last]] with the interior
/// points used as initial subdivision boundaries.
pub fn integrate_breakpoints<T, F>(f: F, points: &[f64], opts: &QuadOptions) -> Result<Estimate<T>, QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if points.len() < 2 {
        return Err(QuadError::InvalidRange { a: f64::NAN, b: f64::NAN });
    }
    for w in points.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite()) || w[1] < w[0] {
            return Err(QuadError::InvalidRange { a: w[0], b: w[1] });
        }
    }
    let panels = opts.initial_panels.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = T::default();
    let mut total_err = 0.0;
    let mut evaluations = 0;
    // Segments too narrow to bisect further keep their error here.
    let mut frozen_err = 0.0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let h = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let a = w[0] + h * k as f64;
            let b = if k + 1 == panels { w[1] } else { a + h };
            let (value, error, magnitude) = gk21_full(&f, a, b)?;
            evaluations += 21;
            total = total + value;
            total_err += error;
            heap.push(Segment { a, b, value, error, magnitude });
        }
    }
    // Cancellation limits attainable accuracy to a few ulps of the integral of |f|.
    let floor = |heap: &BinaryHeap<Segment<T>>| 200.0 * f64::EPSILON * heap.iter().map(|s| s.magnitude).sum::<f64>();
    let mut roundoff = floor(&heap);
    let tolerance = |total: T, roundoff: f64| opts.abs_tol.max(opts.rel_tol * total.norm()).max(roundoff);
    while total_err > tolerance(total, roundoff) {
        if heap.len() >= opts.max_intervals {
            return Err(QuadError::NotConverged {
                error: total_err,
                tolerance: tolerance(total, roundoff),
                intervals: heap.len(),
            });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) < 1e3 * f64::EPSILON * seg.a.abs().max(seg.b.abs()) {
            frozen_err += seg.error;
            if heap.is_empty() {
                heap.push(Segment { error: 0.0, ..seg });
                break;
            }
            heap.push(Segment { error: 0.0, ..seg });
            if frozen_err > tolerance(total, roundoff) {
                return Err(QuadError::NotConverged {
                    error: total_err,
                    tolerance: tolerance(total, roundoff),
                    intervals: heap.len(),
                });
            }
            continue;
        }
        let (v1, e1, m1) = gk21_full(&f, seg.a, mid)?;
        let (v2, e2, m2) = gk21_full(&f, mid, seg.b)?;
        evaluations += 42;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1, magnitude: m1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2, magnitude: m2 });
        // Re-sum now and then so cancellation in the running error does not drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
            roundoff = floor(&heap);
        }
    }
    let value = heap.iter().fold(T::default(), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    Ok(Estimate { value, error, intervals: heap.len(), evaluations })
}

/// Composite Simpson weights for samples on `x` (strictly increasing).
///
/// Pairs of intervals use the non-uniform three-point rule. An odd number of
/// intervals closes with a quadratic fit through the last three points.
pub fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            let h = x[1] - x[0];
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
            return w;
        }
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i < paired {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        w[i] += hs / 6.0 * (2.0 - h1 / h0);
        w[i + 1] += hs / 6.0 * hs * hs / (h0 * h1);
        w[i + 2] += hs / 6.0 * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        let h0 = x[n - 2] - x[n - 3];
        let h1 = x[n - 1] - x[n - 2];
        w[n - 1] += (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        w[n - 2] += (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        w[n - 3] -= h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    w
}

/// Composite Simpson integral of samples `y` on grid `x`.
pub fn simpson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "simpson: grid and samples differ in length");
    simpson_weights(x).iter().zip(y).map(|(w, v)| w * v).sum()
}
