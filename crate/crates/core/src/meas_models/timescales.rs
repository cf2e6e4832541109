use crate::error::{Error, Result};

/// Time for the pointer to become localized and the decoherence time of
/// superpositions separated by the position accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timescales {
    pub tau_loc: f64,
    pub tau_dec: f64,
}

/// tau_loc = sqrt(tau_rel / T) and tau_dec = tau_rel / (mu* T delta^2), with
/// the temperature T in eV and hbar = k_B = 1.
pub fn decoherence_timescales(tau_rel: f64, t_env: f64, mu_star: f64, delta: f64) -> Result<Timescales> {
    for (name, v) in [("tau_rel", tau_rel), ("T_env", t_env), ("mu_star", mu_star), ("delta", delta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} = {v} must be > 0")));
        }
    }
    Ok(Timescales {
        tau_loc: (tau_rel / t_env).sqrt(),
        tau_dec: tau_rel / (mu_star * t_env * delta * delta),
    })
}
