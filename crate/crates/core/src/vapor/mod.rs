//! Vapor-cell physics: Killian vapor density, isotope bookkeeping, Rabi
//! frequencies from beam power and Zeeman shifts.

mod constants;

pub use constants::{ConstantsTable, Defaults, IsotopeData};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::units::{self, BOHR_RATE};

/// Lowest and highest cell temperature accepted by the density model (K).
pub const MIN_TEMPERATURE: f64 = 273.0;
pub const MAX_TEMPERATURE: f64 = 500.0;

/// Boltzmann constant in erg/K as it appears in Killian's formula.
const KILLIAN_BOLTZMANN_CGS: f64 = 1.38e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Isotope {
    Rb85,
    Rb87,
}

impl Isotope {
    pub fn data(self) -> &'static IsotopeData {
        ConstantsTable::builtin().isotope(self)
    }

    pub fn wavelength(self) -> f64 {
        self.data().wavelength_m
    }

    pub fn abundance(self) -> f64 {
        self.data().abundance
    }
}

impl fmt::Display for Isotope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Isotope::Rb85 => f.write_str("rb85"),
            Isotope::Rb87 => f.write_str("rb87"),
        }
    }
}

impl FromStr for Isotope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rb85" | "85rb" | "85" => Ok(Isotope::Rb85),
            "rb87" | "87rb" | "87" => Ok(Isotope::Rb87),
            other => Err(Error::Parse(format!("unknown isotope `{other}`"))),
        }
    }
}

/// Geometry and thermodynamic state of the vapor cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    /// Cell length along the beam (m).
    pub length: f64,
    pub diameter: f64,
    /// Cell temperature (K).
    pub temperature: f64,
    pub isotope: Isotope,
    /// Buffer-gas pressure. Recorded only; no collisional model uses it.
    pub buffer_gas_torr: f64,
}

impl CellConfig {
    /// 4 cm long, 2 cm diameter cell with 5 Torr of helium.
    pub fn reference(temperature: f64, isotope: Isotope) -> Self {
        Self {
            length: 0.04,
            diameter: 0.02,
            temperature,
            isotope,
            buffer_gas_torr: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cell length must be positive, got {}",
                self.length
            )));
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cell diameter must be positive, got {}",
                self.diameter
            )));
        }
        check_temperature(self.temperature)
    }

    /// Density of the addressed isotope (cm^-3).
    pub fn isotope_density(&self) -> Result<f64> {
        Ok(isotope_density(
            killian_density(self.temperature)?,
            self.isotope,
        ))
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if (MIN_TEMPERATURE..=MAX_TEMPERATURE).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain(t))
    }
}

/// Total rubidium density (cm^-3) at `temperature` kelvin from Killian's
/// semi-empirical vapor-pressure law, `10^(10.55 - 4132/T) / (k_B T)` with
/// `k_B` in erg/K.
pub fn killian_density(temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let pressure = 10f64.powf(10.55 - 4132.0 / temperature);
    Ok(pressure / (KILLIAN_BOLTZMANN_CGS * temperature))
}

/// Scales a total density by the natural abundance of `isotope`.
pub fn isotope_density(total: f64, isotope: Isotope) -> f64 {
    total * isotope.abundance()
}

/// Rabi frequency (rad/s) of a uniform disk beam of `power` watts.
///
/// `Omega = gamma * sqrt(I / (2 I_s))` with `I = P / (pi (d/2)^2)`.
pub fn rabi_from_power(
    power: f64,
    beam_diameter: f64,
    saturation_intensity: f64,
    gamma: f64,
) -> Result<f64> {
    for (name, v) in [
        ("power", power),
        ("beam diameter", beam_diameter),
        ("saturation intensity", saturation_intensity),
        ("gamma", gamma),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let radius = 0.5 * beam_diameter;
    let intensity = power / (PI * radius * radius);
    Ok(gamma * (intensity / (2.0 * saturation_intensity)).sqrt())
}

/// Ground-level shift magnitude `mu_B |B| / hbar` (rad/s). The sign per
/// sublevel is applied by the atom model.
pub fn zeeman_shift(b_field: f64) -> Result<f64> {
    if !b_field.is_finite() || b_field.abs() >= 1e-3 {
        return Err(Error::InvalidInput(format!(
            "field must satisfy |B| < 1 mT, got {b_field} T"
        )));
    }
    Ok(BOHR_RATE * b_field.abs())
}

/// `kappa = 3 N lambda^3 / (8 pi^2)` for a density in cm^-3.
pub fn kappa_from_density(density_cm3: f64, wavelength: f64) -> f64 {
    let n = units::per_cm3_to_per_m3(density_cm3);
    3.0 * n * wavelength.powi(3) / (8.0 * PI * PI)
}

/// Dimensionless density constant of the addressed isotope in `cell`.
pub fn kappa_from_cell(cell: &CellConfig) -> Result<f64> {
    cell.validate()?;
    Ok(kappa_from_density(
        cell.isotope_density()?,
        cell.isotope.wavelength(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{milligauss_to_tesla, rad_to_hz};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn killian_matches_reported_range_endpoints() {
        assert!(rel(killian_density(338.0).unwrap(), 0.46e12) < 0.10);
        assert!(rel(killian_density(363.0).unwrap(), 3.0e12) < 0.10);
    }

    #[test]
    fn killian_matches_independent_evaluation_at_350k() {
        // log10 N = 10.55 - 4132/350 - log10(1.38e-16 * 350), evaluated
        // separately in extended precision.
        let expected = 1.149_049_091e12;
        assert!(rel(killian_density(350.0).unwrap(), expected) < 1e-9);
    }

    #[test]
    fn killian_rejects_out_of_range() {
        assert_eq!(killian_density(250.0), Err(Error::Domain(250.0)));
        assert!(killian_density(600.0).is_err());
    }

    #[test]
    fn killian_is_increasing() {
        let mut last = 0.0;
        for i in 0..=100 {
            let n = killian_density(300.0 + i as f64).unwrap();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn abundance_scaling() {
        assert!(rel(isotope_density(1e12, Isotope::Rb87), 2.8e11) < 1e-12);
        assert!(rel(isotope_density(1e12, Isotope::Rb85), 7.2e11) < 1e-12);
        assert_eq!(isotope_density(0.0, Isotope::Rb87), 0.0);
        let sum = Isotope::Rb85.abundance() + Isotope::Rb87.abundance();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rabi_estimates() {
        let table = ConstantsTable::builtin();
        let gamma = table.defaults.gamma();
        let is = table.defaults.saturation_intensity_w_m2;
        let strong = rad_to_hz(rabi_from_power(2.5e-3, 5e-3, is, gamma).unwrap());
        let weak = rad_to_hz(rabi_from_power(0.25e-3, 5e-3, is, gamma).unwrap());
        assert!(rel(strong, 12e6) < 0.2, "{strong}");
        assert!(rel(weak, 3.8e6) < 0.2, "{weak}");
    }

    #[test]
    fn rabi_fixed_point() {
        // Choose the power so that I = 2 I_s exactly.
        let is = 16.0;
        let d = 5e-3;
        let power = 2.0 * is * PI * (d / 2.0) * (d / 2.0);
        let gamma = 3.0e7;
        assert!(rel(rabi_from_power(power, d, is, gamma).unwrap(), gamma) < 1e-14);
    }

    #[test]
    fn zeeman_values() {
        let two = rad_to_hz(zeeman_shift(milligauss_to_tesla(2.0)).unwrap());
        assert!(rel(two, 2.8e3) < 0.02);
        let five = rad_to_hz(zeeman_shift(milligauss_to_tesla(5.0)).unwrap());
        assert!(rel(five, 2.5 * two) < 1e-12);
        assert!(rel(five, 7.0e3) < 0.02);
        assert_eq!(zeeman_shift(0.0).unwrap(), 0.0);
        assert!(zeeman_shift(2e-3).is_err());
    }

    #[test]
    fn kappa_values() {
        // 3 * 1e18 m^-3 * (794.987e-9 m)^3 / (8 pi^2)
        let k = kappa_from_density(1e12, 794.987e-9);
        assert!(rel(k, 0.019_090_249_44) < 1e-9, "{k}");
        assert_eq!(kappa_from_density(0.0, 794.987e-9), 0.0);
        assert!(rel(kappa_from_density(2e12, 794.987e-9), 2.0 * k) < 1e-14);
    }

    #[test]
    fn kappa_from_reference_cell() {
        let cell = CellConfig::reference(350.0, Isotope::Rb87);
        let expected = kappa_from_density(killian_density(350.0).unwrap() * 0.28, 794.987e-9);
        assert!(rel(kappa_from_cell(&cell).unwrap(), expected) < 1e-14);
        let mut bad = cell;
        bad.length = 0.0;
        assert!(kappa_from_cell(&bad).is_err());
    }

    #[test]
    fn isotope_parse() {
        assert_eq!("Rb87".parse::<Isotope>().unwrap(), Isotope::Rb87);
        assert_eq!("rb85".parse::<Isotope>().unwrap(), Isotope::Rb85);
        assert!("rb86".parse::<Isotope>().is_err());
    }
}
