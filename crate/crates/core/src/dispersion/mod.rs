//! Analytic EIT optics of a weakly probed Λ medium and frequency-domain
//! propagation of pulses through the cell.
//!
//! The susceptibility is `χ(δ) = κγδ / (Ω_c² − δ² − iγδ)`; a field
//! component acquires `exp(i (ω/c)(χ/2) L)` over the cell. Time envelopes
//! use the `e^{−iδt}` convention, so a positive slope of `χ'` delays.

mod pulse;
mod spectrum;

pub use pulse::{
    fwhm, peak_time, propagate_pulse, Propagation, Pulse, PulseMetrics, PulseShape,
    TransferFunction, MIN_GRID,
};
pub(crate) use spectrum::parse_three_columns;
pub use spectrum::SusceptibilitySpectrum;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lambda_atom::AtomSpec;
use crate::units::SPEED_OF_LIGHT;
use crate::vapor::kappa_from_density;

/// Above this `|χ|` the dilute-medium relations lose accuracy.
pub const DILUTE_LIMIT: f64 = 0.1;

/// Parameters of the analytic EIT medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Density constant `κ = 3Nλ³/8π²`.
    pub kappa: f64,
    /// Optical coherence decay rate (rad/s).
    pub gamma: f64,
    /// Control Rabi frequency (rad/s).
    pub omega_c: f64,
    /// Cell length (m).
    pub length: f64,
    /// Optical angular frequency (rad/s).
    pub carrier: f64,
}

impl MediumParams {
    pub fn new(kappa: f64, gamma: f64, omega_c: f64, length: f64, carrier: f64) -> Result<Self> {
        let p = Self { kappa, gamma, omega_c, length, carrier };
        p.validate()?;
        Ok(p)
    }

    /// From a density in cm⁻³ and a vacuum wavelength.
    pub fn from_density(
        density_cm3: f64,
        wavelength: f64,
        gamma: f64,
        omega_c: f64,
        length: f64,
    ) -> Result<Self> {
        Self::new(
            kappa_from_density(density_cm3, wavelength),
            gamma,
            omega_c,
            length,
            crate::units::carrier_from_wavelength(wavelength),
        )
    }

    /// Analytic medium equivalent to the density-matrix model of `atom` under
    /// a control of Rabi frequency `control_rabi`: the optical coherence
    /// decays at `γ/2` and the dressing splitting is set by `Ω_c/2`.
    pub fn for_atom(
        kappa: f64,
        atom: &AtomSpec,
        control_rabi: f64,
        length: f64,
        carrier: f64,
    ) -> Result<Self> {
        Self::new(kappa, 0.5 * atom.gamma, 0.5 * control_rabi, length, carrier)
    }

    /// Medium with a given resonant intensity optical depth `κkL` and
    /// transparency half-width `window` (rad/s).
    pub fn from_window(
        optical_depth: f64,
        window: f64,
        gamma: f64,
        length: f64,
        carrier: f64,
    ) -> Result<Self> {
        if !(optical_depth > 0.0 && window > 0.0) {
            return Err(Error::InvalidInput(
                "optical depth and window must be positive".into(),
            ));
        }
        let k = carrier / SPEED_OF_LIGHT;
        let kappa = optical_depth / (k * length);
        let omega_c = (window * gamma * optical_depth.sqrt()).sqrt();
        Self::new(kappa, gamma, omega_c, length, carrier)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("omega_c", self.omega_c),
            ("length", self.length),
            ("carrier", self.carrier),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        self.carrier / SPEED_OF_LIGHT
    }

    /// Resonant intensity optical depth without control, `κkL`.
    pub fn optical_depth(&self) -> f64 {
        self.kappa * self.wavenumber() * self.length
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }
}

/// `χ(δ) = κγδ / (Ω_c² − δ² − iγδ)`.
pub fn analytic_susceptibility(delta: f64, params: &MediumParams) -> Complex64 {
    let num = params.kappa * params.gamma * delta;
    let den = Complex64::new(
        params.omega_c * params.omega_c - delta * delta,
        -params.gamma * delta,
    );
    num / den
}

/// Refractive index `1 + χ'/2` and amplitude absorption coefficient
/// `ωχ''/2c` (m⁻¹). Valid for `|χ| ≤` [`DILUTE_LIMIT`].
pub fn index_absorption(chi: Complex64, carrier: f64) -> (f64, f64) {
    (1.0 + 0.5 * chi.re, carrier * chi.im / (2.0 * SPEED_OF_LIGHT))
}

pub fn is_dilute(chi: Complex64) -> bool {
    chi.norm() <= DILUTE_LIMIT
}

/// Intensity transmission `exp(−2αL)`; underflow yields exactly 0.
pub fn transmission(alpha: f64, length: f64) -> f64 {
    (-2.0 * alpha * length).exp().max(0.0)
}

/// Resonant group delay `(L/c)(ω/2)(κγ/Ω_c²)` relative to vacuum.
pub fn group_delay(params: &MediumParams) -> f64 {
    params.length / SPEED_OF_LIGHT * 0.5 * params.carrier * params.kappa * params.gamma
        / (params.omega_c * params.omega_c)
}

/// Transparency half-width `(Ω_c²/γ)/√(κkL)` (rad/s): the detuning at
/// which the intensity transmission has dropped by `1/e`.
pub fn eit_window(params: &MediumParams, wavenumber: f64) -> f64 {
    params.omega_c * params.omega_c / params.gamma / (params.kappa * wavenumber * params.length).sqrt()
}
