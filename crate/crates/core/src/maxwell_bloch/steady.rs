use num_complex::Complex64;

use super::{stationary_or_mixture, Medium, MbOptions};
use crate::dispersion::index_absorption;
use crate::error::{Error, Result};
use crate::lambda_atom::{AtomSpec, DensityMatrix, DriveConfig, Level};
use crate::polarimetry::{pbs_project, rotation_angle, JonesField};
use crate::vapor::CellConfig;

/// Fixed-point passes for the self-consistent slab-midpoint field.
const MIDPOINT_PASSES: usize = 3;

/// Stationary column of atoms under constant entrance fields.
#[derive(Debug, Clone)]
pub struct SteadyMarch {
    pub states: Vec<DensityMatrix>,
    /// Entrance `(Ω⁺, Ω⁻)` of every slab followed by the exit field.
    pub fields: Vec<(Complex64, Complex64)>,
}

impl SteadyMarch {
    pub fn output(&self) -> (Complex64, Complex64) {
        *self.fields.last().expect("at least the entrance field")
    }
}

fn rho_e(rho: &DensityMatrix) -> (Complex64, Complex64) {
    (rho.get(Level::Excited, Level::Plus), rho.get(Level::Excited, Level::Minus))
}

/// Marches stationary atom states through `z_steps` slabs, each advancing the
/// fields by `i · full · ρ_e±` (`full = (ω/2c) κ γ dz`).
pub fn steady_march(
    atom: &AtomSpec,
    entrance: (Complex64, Complex64),
    detuning: f64,
    b_field: f64,
    z_steps: usize,
    full: f64,
) -> Result<SteadyMarch> {
    let i = Complex64::new(0.0, 1.0);
    let mut states = Vec::with_capacity(z_steps);
    let mut fields = Vec::with_capacity(z_steps + 1);
    let mut f = entrance;
    fields.push(f);
    for _ in 0..z_steps {
        let mut center = f;
        let mut rho = DensityMatrix::ground_mixture(0.5, 0.5)?;
        let passes = if full == 0.0 { 1 } else { MIDPOINT_PASSES };
        for _ in 0..passes {
            let drive = DriveConfig::constant(center.0, center.1, detuning, b_field);
            rho = stationary_or_mixture(atom, &drive)?;
            let (ep, em) = rho_e(&rho);
            center = (f.0 + i * 0.5 * full * ep, f.1 + i * 0.5 * full * em);
        }
        let (ep, em) = rho_e(&rho);
        f = (f.0 + i * full * ep, f.1 + i * full * em);
        states.push(rho);
        fields.push(f);
    }
    Ok(SteadyMarch { states, fields })
}

/// Steady polarization rotation for one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationPoint {
    pub b_field: f64,
    /// `(2π/λ)(n₊ − n₋)L/2` from the entrance-slab indices.
    pub delta_theta: f64,
    /// Orientation of the transmitted polarization ellipse (rad from x̂).
    pub output_angle: f64,
    /// Signal-port intensity including splitter leakage.
    pub signal_port: f64,
    /// Signal-port intensity of an ideal splitter.
    pub signal_ideal: f64,
    pub control_port: f64,
    /// Entrance intensity `|Ω⁺|² + |Ω⁻|²`.
    pub input_total: f64,
}

/// Transmitted polarization for an x-polarized control of Rabi frequency
/// `control_rabi` plus an optional y-polarized `signal`, both constant.
pub fn steady_rotation(
    atom: &AtomSpec,
    cell: &CellConfig,
    control_rabi: f64,
    signal: Complex64,
    b_field: f64,
    options: &MbOptions,
) -> Result<RotationPoint> {
    atom.validate()?;
    if !(control_rabi > 0.0 && control_rabi.is_finite()) {
        return Err(Error::InvalidInput("control Rabi frequency must be positive".into()));
    }
    let medium = Medium::new(cell, atom, options)?;
    let z_steps = ((options.z_steps as f64) * options.grid_scale).round() as usize;
    let z_steps = z_steps.max(1);
    let full = medium.coupling * medium.length / z_steps as f64;

    let c = control_rabi * std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let s = signal * std::f64::consts::FRAC_1_SQRT_2;
    let entrance = ((c + i * s) * options.plus_scale, Complex64::new(c, 0.0) - i * s);
    let march = steady_march(atom, entrance, options.detuning, b_field, z_steps, full)?;

    // Indices seen by each circular component at the entrance.
    let first = &march.states[0];
    let (ep, em) = rho_e(first);
    let chi = |rho_e: Complex64, omega: Complex64| medium.kappa * atom.gamma * rho_e / omega;
    let carrier = medium.carrier();
    let (n_plus, _) = index_absorption(chi(ep, entrance.0), carrier);
    let (n_minus, _) = index_absorption(chi(em, entrance.1), carrier);
    let delta_theta = rotation_angle(n_plus, n_minus, medium.wavelength, medium.length);

    let out = march.output();
    let field = JonesField::circular(out.0, out.1);
    let ports = pbs_project(&field, options.detector_axis, options.extinction)?;
    let ideal = pbs_project(&field, options.detector_axis, 0.0)?;
    let (ex, ey) = field.xy();
    let s1 = ex.norm_sqr() - ey.norm_sqr();
    let s2 = 2.0 * (ex.conj() * ey).re;
    let output_angle = 0.5 * s2.atan2(s1);
    Ok(RotationPoint {
        b_field,
        delta_theta,
        output_angle,
        signal_port: ports.signal,
        signal_ideal: ideal.signal,
        control_port: ports.control,
        input_total: entrance.0.norm_sqr() + entrance.1.norm_sqr(),
    })
}
