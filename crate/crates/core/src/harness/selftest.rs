use num_complex::Complex64;

use super::fit::{fit_window, SlowingData};
use crate::lambda_atom::{steady_state, AtomSpec, DriveConfig, Level};
use crate::maxwell_bloch::{steady_rotation, MbOptions};
use crate::units::{carrier_from_wavelength, celsius_to_kelvin, hz_to_rad, milligauss_to_tesla, rad_to_hz};
use crate::vapor::{killian_density, rabi_from_power, zeeman_shift, CellConfig, ConstantsTable, Isotope};

/// Outcome of one self-test.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Fast sanity checks of the installed build (a few seconds).
pub fn selftest() -> Vec<Check> {
    let mut out = Vec::new();

    let lo = killian_density(338.0).unwrap_or(f64::NAN);
    let hi = killian_density(363.0).unwrap_or(f64::NAN);
    out.push(check(
        "vapor density",
        rel(lo, 0.46e12) <= 0.10 && rel(hi, 3.0e12) <= 0.10,
        format!("338 K: {lo:.3e} cm^-3, 363 K: {hi:.3e} cm^-3"),
    ));

    let d = &ConstantsTable::builtin().defaults;
    let rabi = rabi_from_power(2.5e-3, 5e-3, d.saturation_intensity_w_m2, d.gamma())
        .map(rad_to_hz)
        .unwrap_or(f64::NAN);
    out.push(check(
        "control Rabi frequency",
        rel(rabi, 12e6) <= 0.20,
        format!("2.5 mW over 5 mm: {:.3} MHz", rabi * 1e-6),
    ));

    let z = zeeman_shift(milligauss_to_tesla(2.0)).map(rad_to_hz).unwrap_or(f64::NAN);
    out.push(check("Zeeman shift", rel(z, 2.8e3) <= 0.02, format!("2 mG: {z:.1} Hz")));

    let atom = AtomSpec::default().with_gamma0(0.0);
    let om = Complex64::new(0.5 * atom.gamma, 0.0);
    let ee = steady_state(&atom, &DriveConfig::constant(om, om, 0.0, 0.0))
        .map(|r| r.population(Level::Excited))
        .unwrap_or(f64::NAN);
    out.push(check("dark state", ee <= 1e-6, format!("excited population {ee:.2e}")));

    let mut data = SlowingData {
        optical_depth: 20.0,
        gamma: 0.5 * AtomSpec::default().gamma,
        length: 0.04,
        carrier: carrier_from_wavelength(Isotope::Rb87.wavelength()),
        durations: [2e-6, 5e-6, 10e-6, 30e-6, 100e-6].to_vec(),
        width_ratios: Vec::new(),
    };
    let fitted = data
        .model(hz_to_rad(50e3))
        .and_then(|w| {
            data.width_ratios = w;
            fit_window(&data)
        })
        .map(|f| f.window_hz)
        .unwrap_or(f64::NAN);
    out.push(check(
        "window fit round trip",
        rel(fitted, 50e3) <= 0.10,
        format!("injected 50 kHz, fitted {:.2} kHz", fitted * 1e-3),
    ));

    let cell = CellConfig::reference(celsius_to_kelvin(65.0), Isotope::Rb87);
    let opts = MbOptions { z_steps: 50, resonant_fraction: 1e-2, ..MbOptions::default() };
    let rot = |mg: f64| {
        steady_rotation(&AtomSpec::default(), &cell, hz_to_rad(1.6e6), Complex64::new(0.0, 0.0), milligauss_to_tesla(mg), &opts)
    };
    let detail;
    let passed = match (rot(5.0), rot(-5.0)) {
        (Ok(p), Ok(m)) => {
            let even = (p.signal_ideal - m.signal_ideal).abs() / p.input_total;
            let odd = (p.delta_theta + m.delta_theta).abs();
            detail = format!("|I(B) - I(-B)|/I = {even:.1e}, Δθ(B) + Δθ(-B) = {odd:.1e}");
            even <= 1e-8 && odd <= 1e-9 * p.delta_theta.abs()
        }
        (Err(e), _) | (_, Err(e)) => {
            detail = e.to_string();
            false
        }
    };
    out.push(check("rotation symmetry", passed, detail));
    out
}
