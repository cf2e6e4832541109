use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flags::RegimeFlag;
use crate::quad::{integrate, integrate_breakpoints, simpson, QuadOptions};

pub const NORM_TOLERANCE: f64 = 1e-8;

/// Half-width, in packet widths 1/a, of the momentum window kept for a
/// Gaussian. It holds all but ~1e-11 of the norm.
const GAUSSIAN_WINDOW: f64 = 7.0;

/// Half-width, in units of a, of the position interval of a Gaussian.
const POSITION_WINDOW: f64 = 8.0;

type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Analytic(Profile),
    Sampled { p: Vec<f64>, values: Vec<Complex64> },
}

/// A momentum-space wavefunction on a finite window [p_min, p_max].
#[derive(Clone)]
pub struct MomentumWavefunction {
    repr: Repr,
    domain: (f64, f64),
    /// Interval of x holding the packet. With the free phase it sets how fast
    /// the integrand turns across the window, hence the quadrature panels.
    position_range: (f64, f64),
}

impl fmt::Debug for MomentumWavefunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Analytic(_) => "analytic".to_string(),
            Repr::Sampled { p, .. } => format!("sampled({} points)", p.len()),
        };
        f.debug_struct("MomentumWavefunction")
            .field("repr", &kind)
            .field("domain", &self.domain)
            .field("position_range", &self.position_range)
            .finish()
    }
}

impl MomentumWavefunction {
    /// Wraps a closure; fails with `NotNormalized` if its norm over the
    /// domain is off by more than 1e-8.
    pub fn analytic<F>(f: F, p_min: f64, p_max: f64, position_range: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(p_min < p_max && p_min.is_finite() && p_max.is_finite()) {
            return Err(Error::InvalidInput(format!("empty momentum domain [{p_min}, {p_max}]")));
        }
        check_range(position_range)?;
        let psi = Self { repr: Repr::Analytic(Arc::new(f)), domain: (p_min, p_max), position_range };
        psi.check_norm()?;
        Ok(psi)
    }

    /// Samples on a strictly increasing grid, interpolated by local cubics.
    pub fn sampled(p: Vec<f64>, values: Vec<Complex64>, position_range: (f64, f64)) -> Result<Self> {
        if p.len() != values.len() || p.len() < 4 {
            return Err(Error::InvalidInput("need at least 4 samples with matching lengths".into()));
        }
        if p.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("momentum grid must be strictly increasing".into()));
        }
        let domain = (p[0], p[p.len() - 1]);
        check_range(position_range)?;
        let psi = Self { repr: Repr::Sampled { p, values }, domain, position_range };
        psi.check_norm()?;
        Ok(psi)
    }

    /// (a^2 / 2 pi)^{1/4} exp(-a^2 (p - pbar)^2 / 4 + i p l): a packet of
    /// spatial width a centred at x = -l. The constant phase e^{i pbar l} is
    /// dropped to keep the carrier phase small.
    pub fn gaussian(pbar: f64, a: f64, l: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidInput(format!("packet width a = {a} must be > 0")));
        }
        let norm = (a * a / (2.0 * PI)).powf(0.25);
        let half = GAUSSIAN_WINDOW / a;
        Self::analytic(
            move |p| {
                let q = p - pbar;
                Complex64::from_polar(norm * (-a * a * q * q / 4.0).exp(), q * l)
            },
            pbar - half,
            pbar + half,
            (-l - POSITION_WINDOW * a, -l + POSITION_WINDOW * a),
        )
    }

    /// Equal-weight superposition of two Gaussians of width a, both centred
    /// at x = -l, up to a constant phase.
    pub fn two_packet(spec: &TwoPacketSpec) -> Result<Self> {
        let TwoPacketSpec { a, pbar1, pbar2, l, .. } = *spec;
        let norm = (a * a / (8.0 * PI)).powf(0.25);
        let half = GAUSSIAN_WINDOW / a;
        let mid = 0.5 * (pbar1 + pbar2);
        Self::analytic(
            move |p| {
                let g = |pb: f64| (-a * a * (p - pb) * (p - pb) / 4.0).exp();
                Complex64::from_polar(norm * (g(pbar1) + g(pbar2)), (p - mid) * l)
            },
            pbar1.min(pbar2) - half,
            pbar1.max(pbar2) + half,
            (-l - POSITION_WINDOW * a, -l + POSITION_WINDOW * a),
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn position_range(&self) -> (f64, f64) {
        self.position_range
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        if p < self.domain.0 || p > self.domain.1 {
            return Complex64::new(0.0, 0.0);
        }
        match &self.repr {
            Repr::Analytic(f) => f(p),
            Repr::Sampled { p: grid, values } => cubic(grid, values, p),
        }
    }

    pub fn norm(&self) -> Result<f64> {
        match &self.repr {
            Repr::Sampled { p, values } => {
                let y: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
                Ok(simpson(p, &y))
            }
            Repr::Analytic(f) => {
                let (lo, hi) = self.domain;
                let est = integrate(|p| f(p).norm_sqr(), lo, hi, &QuadOptions::relative(1e-12).with_panels(16))?;
                Ok(est.value)
            }
        }
    }

    fn check_norm(&self) -> Result<()> {
        let norm = self.norm()?;
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            Err(Error::NotNormalized { norm })
        } else {
            Ok(())
        }
    }

    fn panels(&self, mass: f64, t: f64, lo: f64, hi: f64) -> usize {
        // the phase of the x component is -p x - p^2 t / 2M
        let (x0, x1) = self.position_range;
        let rate = [x0, x1]
            .iter()
            .flat_map(|x| [lo, hi].map(|p| (x + p * t / mass).abs()))
            .fold(0.0, f64::max);
        let swing = rate * (hi - lo);
        ((swing / PI).ceil() as usize).clamp(4, 1 << 16)
    }
}

fn check_range((x0, x1): (f64, f64)) -> Result<()> {
    if x0 <= x1 && x0.is_finite() && x1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("bad position range [{x0}, {x1}]")))
    }
}

// Cubic through the four nearest samples (three at the ends).
fn cubic(p: &[f64], v: &[Complex64], x: f64) -> Complex64 {
    let n = p.len();
    let k = p.partition_point(|&q| q <= x).clamp(1, n - 1);
    let start = k.saturating_sub(2).min(n - 4);
    let mut sum = Complex64::new(0.0, 0.0);
    for i in start..start + 4 {
        let mut w = 1.0;
        for j in start..start + 4 {
            if j != i {
                w *= (x - p[j]) / (p[i] - p[j]);
            }
        }
        sum += v[i] * w;
    }
    sum
}

/// Arrival-time density at a detector at x = 0 for a free particle of mass
/// `mass`: the sum of the squared positive- and negative-momentum integrals
/// of sqrt(|p| / (2 pi M)) e^{-i p^2 t / 2M} psi(p).
pub fn kijowski_pdf(psi: &MomentumWavefunction, mass: f64, t: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("mass = {mass} must be > 0")));
    }
    let (lo, hi) = psi.domain;
    let mut total = 0.0;
    for (a, b, sign) in [(lo.max(0.0), hi, 1.0), (lo, hi.min(0.0), -1.0)] {
        if a >= b {
            continue;
        }
        // e^{-i p^2 t / 2M} up to the constant phase at the window centre
        let centre = 0.5 * (a + b);
        let f = |p: f64| {
            let w = (sign * p / (2.0 * PI * mass)).max(0.0).sqrt();
            psi.eval(p) * Complex64::from_polar(w, -(p - centre) * (p + centre) * t / (2.0 * mass))
        };
        let panels = psi.panels(mass, t, a, b);
        // Cauchy-Schwarz bound on the amplitude for a unit-norm psi; far in
        // the tails the amplitude is pure cancellation and only this scale
        // is meaningful.
        let bound = (a.abs().max(b.abs()) * (b - a) / (2.0 * PI * mass)).sqrt();
        let opts = QuadOptions::relative(1e-9)
            .with_abs_tol(1e-12 * bound)
            .with_panels(panels)
            .with_max_intervals(panels * 64);
        let amp = integrate(f, a, b, &opts)?.value;
        total += amp.norm_sqr();
    }
    Ok(total)
}

/// Integral of the arrival density over [t_lo, t_hi].
pub fn kijowski_total(psi: &MomentumWavefunction, mass: f64, t_lo: f64, t_hi: f64) -> Result<f64> {
    let cuts: Vec<f64> = (0..=64).map(|k| t_lo + (t_hi - t_lo) * k as f64 / 64.0).collect();
    let err = std::cell::Cell::new(None);
    let est = integrate_breakpoints(
        |t| match kijowski_pdf(psi, mass, t) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        },
        &cuts,
        // looser than the 1e-9 of each density value; the result is a
        // probability, so 1e-10 absolute is always enough
        &QuadOptions::relative(1e-8).with_abs_tol(1e-10),
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(est.value)
}

/// 1 minus the probability of detection at any time in [t_lo, t_hi].
pub fn no_detection_probability(psi: &MomentumWavefunction, mass: f64, t_lo: f64, t_hi: f64) -> Result<f64> {
    Ok(1.0 - kijowski_total(psi, mass, t_lo, t_hi)?)
}

/// Two Gaussian packets of width `a` with mean momenta `pbar1`, `pbar2`,
/// both starting at x = -l, for a particle of mass `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPacketSpec {
    pub mass: f64,
    pub l: f64,
    pub a: f64,
    pub pbar1: f64,
    pub pbar2: f64,
}

/// a |pbar1 - pbar2| below this is reported as overlapping packets.
const OVERLAP_MIN: f64 = 10.0;

impl TwoPacketSpec {
    pub fn new(mass: f64, l: f64, a: f64, pbar1: f64, pbar2: f64) -> Result<Self> {
        if !(mass > 0.0 && a > 0.0) {
            return Err(Error::InvalidInput("mass and a must be > 0".into()));
        }
        if !(pbar1.is_finite() && pbar2.is_finite() && l.is_finite()) {
            return Err(Error::InvalidInput("non-finite two-packet parameters".into()));
        }
        Ok(Self { mass, l, a, pbar1, pbar2 })
    }

    /// |pbar1^2 - pbar2^2| / (2M)
    pub fn omega(&self) -> f64 {
        (self.pbar1 - self.pbar2).abs() * (self.pbar1 + self.pbar2).abs() / (2.0 * self.mass)
    }

    /// 2 L M / (pbar1 + pbar2)
    pub fn mean_arrival(&self) -> f64 {
        2.0 * self.l * self.mass / (self.pbar1 + self.pbar2)
    }

    /// Temporal width a M / (2 pbar) of each packet's arrival peak.
    pub fn arrival_width(&self) -> f64 {
        self.a * self.mass / (self.pbar1 + self.pbar2)
    }

    pub fn flags(&self) -> Vec<RegimeFlag> {
        let mut flags = Vec::new();
        let gap = self.a * (self.pbar1 - self.pbar2).abs();
        if gap < OVERLAP_MIN && self.pbar1 != self.pbar2 {
            flags.push(RegimeFlag::PacketOverlap { width_times_gap: gap });
        }
        let narrow = self.a * self.pbar1.min(self.pbar2);
        if narrow < OVERLAP_MIN {
            flags.push(RegimeFlag::PacketOverlap { width_times_gap: narrow });
        }
        flags
    }
}

/// Leading-order closed form of the two-packet arrival density, without
/// dispersion:
///
/// (1 / (sqrt(2 pi) M a)) [ p1/2 e^{-2 (L - p1 t/M)^2 / a^2} + p2/2 e^{-2 (L - p2 t/M)^2 / a^2}
///   + sqrt(p1 p2) e^{-((L - p1 t/M)^2 + (L - p2 t/M)^2) / a^2} cos((p1 - p2)(L - (p1 + p2) t / 2M)) ]
///
/// This expression integrates to 1/2, not 1; the leading stationary-phase
/// density of the normalized state is exactly twice it.
pub fn two_packet_arrival_pdf(spec: &TwoPacketSpec, t: f64) -> f64 {
    let TwoPacketSpec { mass, l, a, pbar1, pbar2 } = *spec;
    let d1 = l - pbar1 * t / mass;
    let d2 = l - pbar2 * t / mass;
    let a2 = a * a;
    let cross = (pbar1 * pbar2).sqrt()
        * (-(d1 * d1 + d2 * d2) / a2).exp()
        * ((pbar1 - pbar2) * (l - (pbar1 + pbar2) * t / (2.0 * mass))).cos();
    let diag = 0.5 * pbar1 * (-2.0 * d1 * d1 / a2).exp() + 0.5 * pbar2 * (-2.0 * d2 * d2 / a2).exp();
    (diag + cross) / ((2.0 * PI).sqrt() * mass * a)
}
