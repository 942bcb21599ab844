use num_complex::Complex64;
use std::f64::consts::PI;

use super::{AtomSpec, Circular, DensityMatrix, DriveConfig, Level};
use crate::error::{Error, Result};

/// Susceptibility of one circular component from the optical coherence:
/// `χ± = κ γ ρ_e± / Ω±` with `κ = 3 N λ³ / 8π²` (`N` in m⁻³).
///
/// With this normalization a weak σ⁺ probe on an atom held in `|+⟩` by a
/// σ⁻ control reproduces `κ γ' δ / (Ω'² − δ² − i γ' δ)` with `γ' = γ/2`
/// (optical coherence damping) and `Ω' = Ω_c/2`.
pub fn coherence_susceptibility_component(
    rho: &DensityMatrix,
    atom: &AtomSpec,
    drive: &DriveConfig,
    t: f64,
    pol: Circular,
    density: f64,
    wavelength: f64,
) -> Result<Complex64> {
    let rabi = drive.rabi_component(pol, t);
    if rabi.norm() == 0.0 {
        return Err(Error::DivisionByZero(format!(
            "{pol:?} Rabi frequency is zero; susceptibility undefined"
        )));
    }
    let kappa = 3.0 * density * wavelength.powi(3) / (8.0 * PI * PI);
    let rho_e = rho.get(Level::Excited, pol.ground());
    Ok(kappa * atom.gamma * rho_e / rabi)
}

/// `[χ⁺, χ⁻]` for the current state.
pub fn coherence_susceptibility(
    rho: &DensityMatrix,
    atom: &AtomSpec,
    drive: &DriveConfig,
    t: f64,
    density: f64,
    wavelength: f64,
) -> Result<[Complex64; 2]> {
    Ok([
        coherence_susceptibility_component(rho, atom, drive, t, Circular::Plus, density, wavelength)?,
        coherence_susceptibility_component(rho, atom, drive, t, Circular::Minus, density, wavelength)?,
    ])
}
