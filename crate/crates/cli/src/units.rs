//! Quantities written as "<number> <unit>" in config files and flags.

use osc_povm::units::{metres_to_natural, seconds_to_natural};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// eV and multiples.
    Energy,
    /// eV^-1, or any length or time unit.
    InverseEnergy,
    /// rad or deg.
    Angle,
}

impl Kind {
    pub fn describe(self) -> &'static str {
        match self {
            Kind::Energy => "an energy (eV, keV, MeV, GeV, ...)",
            Kind::InverseEnergy => "a length or time (eV^-1, m, km, s, ns, ...)",
            Kind::Angle => "an angle (rad or deg)",
        }
    }
}

fn energy_scale(prefix: &str) -> Option<f64> {
    Some(match prefix {
        "meV" => 1e-3,
        "eV" => 1.0,
        "keV" => 1e3,
        "MeV" => 1e6,
        "GeV" => 1e9,
        "TeV" => 1e12,
        _ => return None,
    })
}

fn factor(unit: &str, kind: Kind) -> Option<f64> {
    match kind {
        Kind::Energy => energy_scale(unit),
        Kind::Angle => match unit {
            "rad" => Some(1.0),
            "deg" => Some(std::f64::consts::PI / 180.0),
            _ => None,
        },
        Kind::InverseEnergy => {
            if let Some(e) = unit.strip_suffix("^-1").or_else(|| unit.strip_prefix("1/")) {
                return energy_scale(e).map(|s| 1.0 / s);
            }
            let metres = match unit {
                "fm" => Some(1e-15),
                "nm" => Some(1e-9),
                "um" => Some(1e-6),
                "mm" => Some(1e-3),
                "cm" => Some(1e-2),
                "m" => Some(1.0),
                "km" => Some(1e3),
                _ => None,
            };
            if let Some(m) = metres {
                return Some(metres_to_natural(m));
            }
            let seconds = match unit {
                "fs" => 1e-15,
                "ps" => 1e-12,
                "ns" => 1e-9,
                "us" => 1e-6,
                "ms" => 1e-3,
                "s" => 1.0,
                _ => return None,
            };
            Some(seconds_to_natural(seconds))
        }
    }
}

/// Splits "1e4eV" into (1e4, "eV"), taking the longest numeric prefix.
fn split(text: &str) -> Option<(f64, &str)> {
    let text = text.trim();
    let run = text.find(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c))).unwrap_or(text.len());
    (1..=run).rev().find_map(|n| text[..n].parse::<f64>().ok().map(|v| (v, text[n..].trim())))
}

/// Value in natural units (eV, eV^-1 or rad).
pub fn parse_quantity(text: &str, kind: Kind) -> Result<f64, String> {
    let (value, unit) = split(text).ok_or_else(|| format!("'{text}' does not start with a number"))?;
    if unit.is_empty() {
        return Err(format!("'{text}' has no unit; expected {}", kind.describe()));
    }
    let f = factor(unit, kind).ok_or_else(|| format!("unit '{unit}' is not {}", kind.describe()))?;
    if !value.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(value * f)
}
