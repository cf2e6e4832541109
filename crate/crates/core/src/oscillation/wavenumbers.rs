use crate::types::MassSpectrum;

/// k_ij = (E_i - eps)/v_i - (E_j - eps)/v_j - (p_i - p_j).
///
/// Evaluated as m_i^2/p_i - m_j^2/p_j - eps (E_i/p_i - E_j/p_j), with the
/// last difference rewritten so nearly degenerate states do not cancel.
pub fn oscillation_wavenumber(spectrum: &MassSpectrum, i: usize, j: usize, epsilon_th: f64) -> f64 {
    if i == j {
        return 0.0;
    }
    let a = spectrum.eigenstate(i);
    let b = spectrum.eigenstate(j);
    let (ri, rj) = (a.mass / a.momentum, b.mass / b.momentum);
    let inv_vi = spectrum.inverse_velocity(i);
    let inv_vj = spectrum.inverse_velocity(j);
    let kinetic = a.mass * ri - b.mass * rj;
    let inv_v_diff = (ri - rj) * (ri + rj) / (inv_vi + inv_vj);
    kinetic - epsilon_th * inv_v_diff
}

/// (1 - eps/(2p)) (m_i^2 - m_j^2)/E with p and E averaged over the pair.
pub fn wavenumber_near_degenerate(spectrum: &MassSpectrum, i: usize, j: usize, epsilon_th: f64) -> f64 {
    let (p, e) = pair_means(spectrum, i, j);
    (1.0 - epsilon_th / (2.0 * p)) * mass_splitting(spectrum, i, j) / e
}

/// Ultra-relativistic form (1 - eps/(2E)) (m_i^2 - m_j^2)/E.
pub fn wavenumber_ultra_relativistic(spectrum: &MassSpectrum, i: usize, j: usize, epsilon_th: f64) -> f64 {
    let (_, e) = pair_means(spectrum, i, j);
    (1.0 - epsilon_th / (2.0 * e)) * mass_splitting(spectrum, i, j) / e
}

/// Standard ultra-relativistic wavenumber (m_i^2 - m_j^2)/(2p), signed, with
/// p the mean momentum of the pair.
pub fn standard_wavenumber(spectrum: &MassSpectrum, i: usize, j: usize) -> f64 {
    let (p, _) = pair_means(spectrum, i, j);
    mass_splitting(spectrum, i, j) / (2.0 * p)
}

fn mass_splitting(spectrum: &MassSpectrum, i: usize, j: usize) -> f64 {
    let (mi, mj) = (spectrum.eigenstate(i).mass, spectrum.eigenstate(j).mass);
    (mi - mj) * (mi + mj)
}

fn pair_means(spectrum: &MassSpectrum, i: usize, j: usize) -> (f64, f64) {
    let p = 0.5 * (spectrum.eigenstate(i).momentum + spectrum.eigenstate(j).momentum);
    let e = 0.5 * (spectrum.kinematics(i).energy + spectrum.kinematics(j).energy);
    (p, e)
}
