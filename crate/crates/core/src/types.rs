//! Domain types shared by every engine: mass spectra, mixing matrices,
//! initial wave packets and detection channels.
//!
//! All quantities are in natural units with energies in eV.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// One mass eigenstate of the oscillating particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenstate {
    pub mass: f64,
    /// Mean momentum carried by this branch of the initial state.
    pub momentum: f64,
    /// Decay rate at `momentum`; zero for stable particles.
    pub decay_rate: f64,
    /// d(decay rate)/dp at `momentum`. Only the dispersive amplitude uses it.
    pub decay_slope: f64,
}

impl Eigenstate {
    pub fn stable(mass: f64, momentum: f64) -> Self {
        Self { mass, momentum, decay_rate: 0.0, decay_slope: 0.0 }
    }
}

/// Energy, velocity and dispersion coefficient of one eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kinematics {
    pub energy: f64,
    pub velocity: f64,
    /// m^2 / E^3, the curvature of E(p).
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSpectrum {
    eigenstates: Vec<Eigenstate>,
}

impl MassSpectrum {
    pub fn new(eigenstates: Vec<Eigenstate>) -> Result<Self> {
        if eigenstates.is_empty() {
            return Err(Error::InvalidInput("mass spectrum has no eigenstates".into()));
        }
        for (i, e) in eigenstates.iter().enumerate() {
            if !(e.mass >= 0.0 && e.mass.is_finite()) {
                return Err(Error::InvalidInput(format!("mass[{i}] = {} must be >= 0", e.mass)));
            }
            if !(e.momentum >= 0.0 && e.momentum.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "momentum[{i}] = {} must be >= 0",
                    e.momentum
                )));
            }
            if e.mass == 0.0 && e.momentum == 0.0 {
                return Err(Error::InvalidInput(format!("eigenstate {i} has zero energy")));
            }
            if !(e.decay_rate >= 0.0 && e.decay_rate.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "decay_rate[{i}] = {} must be >= 0",
                    e.decay_rate
                )));
            }
            if !e.decay_slope.is_finite() {
                return Err(Error::InvalidInput(format!("decay_slope[{i}] is not finite")));
            }
        }
        Ok(Self { eigenstates })
    }

    /// Every branch carries the same momentum `p`.
    pub fn equal_momentum(masses: &[f64], p: f64) -> Result<Self> {
        Self::new(masses.iter().map(|&m| Eigenstate::stable(m, p)).collect())
    }

    /// Every branch carries the same energy `e`; requires `e >= max(m)`.
    pub fn equal_energy(masses: &[f64], e: f64) -> Result<Self> {
        let states = masses
            .iter()
            .map(|&m| {
                if e < m {
                    Err(Error::InvalidInput(format!("energy {e} below mass {m}")))
                } else {
                    Ok(Eigenstate::stable(m, ((e - m) * (e + m)).sqrt()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    /// Every branch moves with the same velocity `v` in [0, 1).
    pub fn equal_velocity(masses: &[f64], v: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("velocity {v} outside [0, 1)")));
        }
        let gamma_v = v / ((1.0 - v) * (1.0 + v)).sqrt();
        Self::new(masses.iter().map(|&m| Eigenstate::stable(m, m * gamma_v)).collect())
    }

    pub fn with_decay_rates(mut self, rates: &[f64]) -> Result<Self> {
        if rates.len() != self.eigenstates.len() {
            return Err(Error::InvalidInput("decay rate count differs from mass count".into()));
        }
        for (e, &g) in self.eigenstates.iter_mut().zip(rates) {
            e.decay_rate = g;
        }
        Self::new(self.eigenstates)
    }

    pub fn with_decay_slopes(mut self, slopes: &[f64]) -> Result<Self> {
        if slopes.len() != self.eigenstates.len() {
            return Err(Error::InvalidInput("decay slope count differs from mass count".into()));
        }
        for (e, &d) in self.eigenstates.iter_mut().zip(slopes) {
            e.decay_slope = d;
        }
        Self::new(self.eigenstates)
    }

    /// Copy of the spectrum with all momenta replaced by `p`.
    pub fn with_common_momentum(&self, p: f64) -> Result<Self> {
        let mut states = self.eigenstates.clone();
        for e in &mut states {
            e.momentum = p;
        }
        Self::new(states)
    }

    pub fn len(&self) -> usize {
        self.eigenstates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenstates.is_empty()
    }

    pub fn eigenstates(&self) -> &[Eigenstate] {
        &self.eigenstates
    }

    pub fn eigenstate(&self, i: usize) -> &Eigenstate {
        &self.eigenstates[i]
    }

    pub fn kinematics(&self, i: usize) -> Kinematics {
        kinematics(self, i)
    }

    /// E_i / p_i, evaluated without forming the velocity first.
    pub fn inverse_velocity(&self, i: usize) -> f64 {
        let e = &self.eigenstates[i];
        e.mass.hypot(e.momentum) / e.momentum
    }

    pub fn mean_momentum(&self) -> f64 {
        self.eigenstates.iter().map(|e| e.momentum).sum::<f64>() / self.len() as f64
    }
}

/// E = sqrt(m^2 + p^2), v = p / E and mu = m^2 / E^3 for eigenstate `i`.
pub fn kinematics(spectrum: &MassSpectrum, i: usize) -> Kinematics {
    let e = spectrum.eigenstate(i);
    let energy = e.mass.hypot(e.momentum);
    Kinematics {
        energy,
        velocity: e.momentum / energy,
        mu: e.mass * e.mass / (energy * energy * energy),
    }
}

/// Unitary flavor/mass matrix; row index is flavor, column index is mass eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    entries: DMatrix<Complex64>,
}

pub const UNITARITY_TOLERANCE: f64 = 1e-10;

impl MixingMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let m = Self { entries };
        validate_mixing_matrix(&m)?;
        Ok(m)
    }

    /// Rows of complex entries. Does not validate; pair with
    /// [`validate_mixing_matrix`].
    pub fn from_rows_unchecked(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        Self { entries: DMatrix::from_fn(n, cols, |r, c| rows[r].get(c).copied().unwrap_or_default()) }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(Error::InvalidInput("mixing matrix must be square".into()));
        }
        Self::new(Self::from_rows_unchecked(rows).entries)
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    /// Two-flavor rotation [[cos, sin], [-sin, cos]].
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        Self { entries: DMatrix::from_row_slice(2, 2, &[r(c), r(s), r(-s), r(c)]) }
    }

    /// Product of plane rotations applied in order: U = G_k ... G_2 G_1.
    pub fn from_rotations(n: usize, rotations: &[PlaneRotation]) -> Result<Self> {
        let mut u = DMatrix::<Complex64>::identity(n, n);
        for r in rotations {
            if r.i >= n || r.j >= n || r.i == r.j {
                return Err(Error::InvalidInput(format!(
                    "rotation plane ({}, {}) invalid for dimension {n}",
                    r.i, r.j
                )));
            }
            u = r.matrix(n) * u;
        }
        Self::new(u)
    }

    /// Standard three-flavor parameterization R23 * U13(delta) * R12.
    pub fn pmns(theta12: f64, theta13: f64, theta23: f64, delta_cp: f64) -> Self {
        let rots = [
            PlaneRotation { i: 0, j: 1, angle: theta12, phase: 0.0 },
            PlaneRotation { i: 0, j: 2, angle: theta13, phase: delta_cp },
            PlaneRotation { i: 1, j: 2, angle: theta23, phase: 0.0 },
        ];
        Self::from_rotations(3, &rots).expect("plane rotations are unitary")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// U_{alpha i}
    pub fn get(&self, flavor: usize, mass: usize) -> Complex64 {
        self.entries[(flavor, mass)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// U*_{beta i} U_{alpha i}: weight of branch `i` in the amplitude for
    /// production flavor `beta` and detection flavor `alpha`.
    pub fn branch_weight(&self, production: usize, detection: usize, i: usize) -> Complex64 {
        self.get(production, i).conj() * self.get(detection, i)
    }
}

/// Rotation by `angle` in the (i, j) plane, with phase e^{-i phase} on the
/// upper off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
    pub phase: f64,
}

impl PlaneRotation {
    fn matrix(&self, n: usize) -> DMatrix<Complex64> {
        let (s, c) = self.angle.sin_cos();
        let e = Complex64::from_polar(1.0, -self.phase);
        let mut m = DMatrix::<Complex64>::identity(n, n);
        m[(self.i, self.i)] = Complex64::new(c, 0.0);
        m[(self.j, self.j)] = Complex64::new(c, 0.0);
        m[(self.i, self.j)] = e * s;
        m[(self.j, self.i)] = -e.conj() * s;
        m
    }
}

/// Ok iff every entry of U U^dag - 1 is below 1e-10 in modulus.
pub fn validate_mixing_matrix(u: &MixingMatrix) -> Result<()> {
    let m = &u.entries;
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "mixing matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("mixing matrix has non-finite entries".into()));
    }
    let product = m * m.adjoint();
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((product[(r, c)] - target).norm());
        }
    }
    if worst > UNITARITY_TOLERANCE {
        Err(Error::NonUnitary { max_deviation: worst })
    } else {
        Ok(())
    }
}

/// Superposition of Gaussian mass-eigenstate packets of common width `sigma`,
/// produced in flavor `production_flavor` and centred at `center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavePacketState {
    pub sigma: f64,
    pub production_flavor: usize,
    pub spectrum: MassSpectrum,
    /// Packet centre. The initial wavefunction is psi_0(x - center).
    pub center: f64,
}

impl WavePacketState {
    pub fn new(sigma: f64, production_flavor: usize, spectrum: MassSpectrum) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma = {sigma} must be > 0")));
        }
        if production_flavor >= spectrum.len() {
            return Err(Error::InvalidInput(format!(
                "production flavor {production_flavor} out of range for {} states",
                spectrum.len()
            )));
        }
        Ok(Self { sigma, production_flavor, spectrum, center: 0.0 })
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn n_states(&self) -> usize {
        self.spectrum.len()
    }
}

/// A detection process with threshold `epsilon_th`, product particles of the
/// given masses, position accuracy `delta` and temporal resolution `tau_dec`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionChannel {
    /// Threshold energy; may be zero or negative for exothermic reactions.
    pub epsilon_th: f64,
    pub product_masses: Vec<f64>,
    pub delta: f64,
    pub tau_dec: f64,
    pub detection_flavor: usize,
}

impl DetectionChannel {
    pub fn new(
        epsilon_th: f64,
        product_masses: Vec<f64>,
        delta: f64,
        tau_dec: f64,
        detection_flavor: usize,
    ) -> Result<Self> {
        if !epsilon_th.is_finite() {
            return Err(Error::InvalidInput("epsilon_th is not finite".into()));
        }
        if product_masses.is_empty() {
            return Err(Error::InvalidInput("detection channel needs product particles".into()));
        }
        if let Some(m) = product_masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidInput(format!("product mass {m} must be > 0")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta = {delta} must be > 0")));
        }
        if !(tau_dec > 0.0 && tau_dec.is_finite()) {
            return Err(Error::InvalidInput(format!("tau_dec = {tau_dec} must be > 0")));
        }
        Ok(Self { epsilon_th, product_masses, delta, tau_dec, detection_flavor })
    }

    /// Channel whose single product particle has mass M with M * delta^2 =
    /// `tau_sup` and M * delta = `m_delta`.
    pub fn with_timescales(
        epsilon_th: f64,
        tau_dec: f64,
        tau_sup: f64,
        m_delta: f64,
        detection_flavor: usize,
    ) -> Result<Self> {
        let delta = tau_sup / m_delta;
        Self::new(epsilon_th, vec![m_delta / delta], delta, tau_dec, detection_flavor)
    }

    pub fn min_product_mass(&self) -> f64 {
        self.product_masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// M_min * delta^2
    pub fn tau_sup(&self) -> f64 {
        self.min_product_mass() * self.delta * self.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_is_unitary() {
        assert!(validate_mixing_matrix(&MixingMatrix::rotation(PI / 6.0)).is_ok());
        assert!(validate_mixing_matrix(&MixingMatrix::identity(4)).is_ok());
    }

    #[test]
    fn shear_is_not_unitary() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let m = MixingMatrix::from_rows_unchecked(&[vec![c(1.0), c(0.1)], vec![c(0.0), c(1.0)]]);
        match validate_mixing_matrix(&m) {
            Err(Error::NonUnitary { max_deviation }) => assert!((max_deviation - 0.1).abs() < 1e-12),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
        assert!(MixingMatrix::from_rows(&[vec![c(1.0), c(0.1)], vec![c(0.0), c(1.0)]]).is_err());
    }

    #[test]
    fn pmns_with_phase_is_unitary() {
        let u = MixingMatrix::pmns(0.59, 0.15, 0.84, 1.2);
        assert!(validate_mixing_matrix(&u).is_ok());
        assert!(u.get(0, 2).im.abs() > 0.0);
    }

    #[test]
    fn massless_kinematics() {
        let s = MassSpectrum::equal_momentum(&[0.0], 1.0).unwrap();
        let k = s.kinematics(0);
        assert_eq!((k.energy, k.velocity, k.mu), (1.0, 1.0, 0.0));
    }

    #[test]
    fn pythagorean_kinematics() {
        let s = MassSpectrum::equal_momentum(&[3.0], 4.0).unwrap();
        let k = kinematics(&s, 0);
        assert_eq!(k.energy, 5.0);
        assert!((k.velocity - 0.8).abs() < 1e-15);
        assert!((k.mu - 9.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn momentum_conventions() {
        let masses = [0.3, 0.5];
        let e = MassSpectrum::equal_energy(&masses, 2.0).unwrap();
        for i in 0..2 {
            assert!((e.kinematics(i).energy - 2.0).abs() < 1e-14);
        }
        let v = MassSpectrum::equal_velocity(&masses, 0.6).unwrap();
        for i in 0..2 {
            assert!((v.kinematics(i).velocity - 0.6).abs() < 1e-14);
        }
        assert!(MassSpectrum::equal_energy(&masses, 0.4).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MassSpectrum::equal_momentum(&[-1.0], 1.0).is_err());
        let s = MassSpectrum::equal_momentum(&[1.0, 2.0], 1.0).unwrap();
        assert!(s.clone().with_decay_rates(&[0.0, -1.0]).is_err());
        assert!(WavePacketState::new(-1.0, 0, s.clone()).is_err());
        assert!(WavePacketState::new(1.0, 2, s).is_err());
        assert!(DetectionChannel::new(0.0, vec![1.0], 0.0, 1.0, 0).is_err());
        assert!(DetectionChannel::new(0.0, vec![-1.0], 1.0, 1.0, 0).is_err());
        // negative thresholds are physical
        assert!(DetectionChannel::new(-2.0, vec![1.0], 1.0, 1.0, 0).is_ok());
    }

    #[test]
    fn tau_sup_uses_lightest_product() {
        let ch = DetectionChannel::new(0.0, vec![5.0, 2.0], 3.0, 1.0, 0).unwrap();
        assert_eq!(ch.tau_sup(), 18.0);
        let ch = DetectionChannel::with_timescales(0.0, 1.0, 50.0, 100.0, 0).unwrap();
        assert!((ch.tau_sup() - 50.0).abs() < 1e-12);
        assert!((ch.product_masses[0] * ch.delta - 100.0).abs() < 1e-12);
    }
}
