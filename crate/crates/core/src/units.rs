//! Physical constants and unit conversions.
//!
//! Internally every rate is an angular frequency in rad/s, every length is
//! in meters and every field in tesla. The helpers below are the only place
//! where cyclic frequencies, gauss or CGS densities enter.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Ground-level shift per unit field, mu_B / hbar (rad/s per tesla).
pub const BOHR_RATE: f64 = BOHR_MAGNETON / HBAR;

pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

pub fn gauss_to_tesla(g: f64) -> f64 {
    g * 1e-4
}

pub fn tesla_to_gauss(t: f64) -> f64 {
    t * 1e4
}

pub fn milligauss_to_tesla(mg: f64) -> f64 {
    mg * 1e-7
}

pub fn per_cm3_to_per_m3(n: f64) -> f64 {
    n * 1e6
}

pub fn per_m3_to_per_cm3(n: f64) -> f64 {
    n * 1e-6
}

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + 273.15
}

/// Optical angular frequency for a vacuum wavelength.
pub fn carrier_from_wavelength(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Vacuum wavenumber 2 pi / lambda.
pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}
