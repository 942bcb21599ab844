//! One-dimensional co-propagation of the control and signal envelopes
//! through a column of Λ atoms, in the frame moving with the light.
//!
//! Each circular component obeys `∂Ω±/∂z = i (ω/2c) κ γ ρ_e±`. The cell is
//! cut into slabs; the atoms of a slab are driven by the field at its
//! midpoint, which the slab itself has already modified by half a step. The
//! atoms advance with the fixed-step fourth-order integrator of the atom
//! model, and the field leaving a slab at intermediate times is built from
//! a cubic Hermite interpolant of the slab state.

mod analysis;
mod protocol;
mod steady;
mod trace;

pub use analysis::{
    slowing_delay, sir_scan, storage_efficiency, Efficiency, SirPoint,
};
pub use protocol::{ramp, SignalPulse, StorageProtocol, CONTROL_RISE, SIGNAL_RISE};
pub use steady::{steady_march, steady_rotation, RotationPoint, SteadyMarch};
pub use trace::DetectorTrace;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lambda_atom::{
    max_stable_step, rhs, steady_state, AtomSpec, AtomState, DensityMatrix, DriveConfig, Rates,
};
use crate::polarimetry::{pbs_project, JonesField, DEFAULT_EXTINCTION};
use crate::units::SPEED_OF_LIGHT;
use crate::vapor::{kappa_from_cell, kappa_from_density, CellConfig};

/// Default number of slabs.
pub const DEFAULT_Z_STEPS: usize = 200;
/// Largest resonant amplitude absorption `α dz` per slab.
pub const MAX_STEP_ABSORPTION: f64 = 0.2;
/// Fewest slabs accepted (`dz ≤ L/50`).
pub const MIN_Z_STEPS: usize = 50;
/// Relative energy excess tolerated before a run counts as gaining.
const ENERGY_TOL: f64 = 1e-9;

/// Numerical and detection settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MbOptions {
    pub z_steps: usize,
    /// Time step; `None` uses the stability bound.
    pub dt: Option<f64>,
    /// Multiplies `z_steps` and divides `dt`.
    pub grid_scale: f64,
    /// Share of the atoms resonant with the narrow-band fields (scales κ).
    pub resonant_fraction: f64,
    /// Overrides the cell density (cm⁻³), e.g. 0 for vacuum.
    pub density_override: Option<f64>,
    /// Common one-photon detuning (rad/s).
    pub detuning: f64,
    /// σ⁺ amplitude scale relative to σ⁻ (1 = balanced).
    pub plus_scale: f64,
    pub extinction: f64,
    /// Detector (signal-port) axis from x̂ (rad).
    pub detector_axis: f64,
    /// Recording interval in steps; `None` records about every 5 ns.
    pub record_stride: Option<usize>,
    /// Check atom-state invariants every this many steps.
    pub check_every: usize,
}

impl Default for MbOptions {
    fn default() -> Self {
        Self {
            z_steps: DEFAULT_Z_STEPS,
            dt: None,
            grid_scale: 1.0,
            resonant_fraction: 1.0,
            density_override: None,
            detuning: 0.0,
            plus_scale: 1.0,
            extinction: DEFAULT_EXTINCTION,
            detector_axis: 0.5 * PI,
            record_stride: None,
            check_every: 8,
        }
    }
}

/// Discretization of the cell and of retarded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub z_steps: usize,
    pub dz: f64,
    pub t_steps: usize,
    pub dt: f64,
}

impl Grid1D {
    /// Checks `dz ≤ L/50`, the atom step bound and `α dz ≤ 0.2`.
    pub fn validate(&self, length: f64, dt_bound: f64, alpha_resonant: f64) -> Result<()> {
        if self.z_steps < MIN_Z_STEPS || self.dz > length / MIN_Z_STEPS as f64 * (1.0 + 1e-12) {
            return Err(Error::Configuration(format!(
                "dz = {:.3e} m exceeds L/{MIN_Z_STEPS}",
                self.dz
            )));
        }
        if self.dt > dt_bound * (1.0 + 1e-9) {
            return Err(Error::Configuration(format!(
                "dt = {:.3e} s exceeds the stability bound {dt_bound:.3e} s",
                self.dt
            )));
        }
        let per_step = alpha_resonant * self.dz;
        if per_step > MAX_STEP_ABSORPTION * (1.0 + 1e-9) {
            return Err(Error::Configuration(format!(
                "resonant absorption per slab {per_step:.3} exceeds {MAX_STEP_ABSORPTION}; \
                 need at least {} slabs",
                (alpha_resonant * self.dz * self.z_steps as f64 / MAX_STEP_ABSORPTION).ceil()
            )));
        }
        Ok(())
    }
}

/// Medium seen by the fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Effective density constant (after the resonant fraction).
    pub kappa: f64,
    pub length: f64,
    pub wavelength: f64,
    /// `(ω/2c) κ γ`, so that `∂Ω/∂z = i · coupling · ρ_e`.
    pub coupling: f64,
    /// Resonant amplitude absorption coefficient `(ω/2c) κ` (m⁻¹).
    pub alpha_resonant: f64,
}

impl Medium {
    pub fn new(cell: &CellConfig, atom: &AtomSpec, options: &MbOptions) -> Result<Self> {
        cell.validate()?;
        if !(options.resonant_fraction > 0.0 && options.resonant_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "resonant fraction must lie in (0, 1], got {}",
                options.resonant_fraction
            )));
        }
        let wavelength = cell.isotope.wavelength();
        let kappa = match options.density_override {
            Some(n) if n >= 0.0 && n.is_finite() => kappa_from_density(n, wavelength),
            Some(n) => return Err(Error::InvalidInput(format!("invalid density {n}"))),
            None => kappa_from_cell(cell)?,
        } * options.resonant_fraction;
        let half_k = PI / wavelength;
        Ok(Self {
            kappa,
            length: cell.length,
            wavelength,
            coupling: half_k * kappa * atom.gamma,
            alpha_resonant: half_k * kappa,
        })
    }

    /// Resonant intensity optical depth `κkL` without control.
    pub fn optical_depth(&self) -> f64 {
        2.0 * self.alpha_resonant * self.length
    }

    pub fn carrier(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Result of [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: DetectorTrace,
    /// Recorded entrance and exit `(Ω⁺, Ω⁻)`.
    pub input: Vec<(Complex64, Complex64)>,
    pub output: Vec<(Complex64, Complex64)>,
    pub grid: Grid1D,
    pub medium: Medium,
    /// `∫ (|Ω⁺|² + |Ω⁻|²) dt` at the entrance and exit.
    pub energy_in: f64,
    pub energy_out: f64,
}

impl Simulation {
    /// Detector trace without splitter leakage.
    pub fn ideal_trace(&self, detector_axis: f64) -> DetectorTrace {
        project(&self.trace.time, &self.output, detector_axis, 0.0)
    }

    /// Entrance signal-port intensity without leakage.
    pub fn input_trace(&self, detector_axis: f64) -> DetectorTrace {
        project(&self.trace.time, &self.input, detector_axis, 0.0)
    }
}

fn project(time: &[f64], fields: &[(Complex64, Complex64)], axis: f64, extinction: f64) -> DetectorTrace {
    let mut signal = Vec::with_capacity(fields.len());
    let mut control = Vec::with_capacity(fields.len());
    for &(p, m) in fields {
        let ports = pbs_project(&JonesField::circular(p, m), axis, extinction)
            .expect("finite fields and validated extinction");
        signal.push(ports.signal);
        control.push(ports.control);
    }
    DetectorTrace { time: time.to_vec(), signal, control, metadata: Default::default() }
}

/// Entries decaying through the subnormal range slow the arithmetic by
/// orders of magnitude; anything this small is physically zero.
const NEGLIGIBLE: f64 = 1e-200;

fn flush_negligible(s: &mut AtomState) {
    for v in s.0.iter_mut() {
        if v.abs() < NEGLIGIBLE {
            *v = 0.0;
        }
    }
}

#[inline]
fn slab_rhs(rates: &Rates, s: &AtomState, field: (Complex64, Complex64), half: f64) -> AtomState {
    let i = Complex64::new(0.0, half);
    rhs(rates, s, field.0 + i * s.rho_e_plus(), field.1 + i * s.rho_e_minus())
}

#[inline]
fn slab_output(s: &AtomState, field: (Complex64, Complex64), full: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, full);
    (field.0 + i * s.rho_e_plus(), field.1 + i * s.rho_e_minus())
}

/// Propagates the protocol fields through the cell.
pub fn simulate(
    protocol: &StorageProtocol,
    cell: &CellConfig,
    atom: &AtomSpec,
    b_field: f64,
    options: &MbOptions,
) -> Result<Simulation> {
    protocol.validate()?;
    atom.validate()?;
    if !b_field.is_finite() || !options.detuning.is_finite() {
        return Err(Error::InvalidInput("field and detuning must be finite".into()));
    }
    if !(options.grid_scale > 0.0 && options.plus_scale > 0.0) {
        return Err(Error::InvalidInput("grid and σ⁺ scales must be positive".into()));
    }
    if !(0.0..=1.0).contains(&options.extinction) {
        return Err(Error::InvalidInput("extinction must lie in [0, 1]".into()));
    }
    let medium = Medium::new(cell, atom, options)?;
    let rates = Rates::from_parts(atom, options.detuning, 0.0, b_field);

    let dt_bound = max_stable_step(atom, &rates, b_field, protocol.max_rabi(options.plus_scale));
    let dt_req = options.dt.unwrap_or(dt_bound) / options.grid_scale;
    let t_steps = (protocol.end_time / dt_req - 1e-9).ceil().max(1.0) as usize;
    let dt = protocol.end_time / t_steps as f64;
    let z_steps = (options.z_steps as f64 * options.grid_scale).round() as usize;
    let grid = Grid1D { z_steps, dz: medium.length / z_steps.max(1) as f64, t_steps, dt };
    grid.validate(medium.length, dt_bound, medium.alpha_resonant)?;

    let full = medium.coupling * grid.dz;
    let half = 0.5 * full;
    let fields_at = |t: f64| protocol.entrance_fields(t, options.plus_scale);

    // Initial slabs: stationary under the entrance fields at t = 0.
    let init = steady_march(atom, fields_at(0.0), options.detuning, b_field, z_steps, full)?;
    let mut states: Vec<AtomState> = init.states.iter().map(AtomState::from_density_matrix).collect();

    let stride = options
        .record_stride
        .unwrap_or_else(|| ((5e-9 / dt).floor() as usize).max(1))
        .max(1);
    let n_rec = t_steps / stride + 2;
    let mut time = Vec::with_capacity(n_rec);
    let mut input = Vec::with_capacity(n_rec);
    let mut output = Vec::with_capacity(n_rec);

    // Derivatives at the current time, entrance fields known per slab.
    let mut derivs = Vec::with_capacity(z_steps);
    {
        let mut f = fields_at(0.0);
        for s in &states {
            derivs.push(slab_rhs(&rates, s, f, half));
            f = slab_output(s, f, full);
        }
        time.push(0.0);
        input.push(fields_at(0.0));
        output.push(f);
    }
    let intensity = |f: (Complex64, Complex64)| f.0.norm_sqr() + f.1.norm_sqr();
    let mut energy_in = 0.0;
    let mut energy_out = 0.0;
    let mut last_out = output[0];
    let mut last_in = input[0];

    for n in 0..t_steps {
        let t = n as f64 * dt;
        let mut f0 = fields_at(t);
        let mut fm = fields_at(t + 0.5 * dt);
        let mut f1 = fields_at(t + dt);
        let entrance_end = f1;
        for j in 0..z_steps {
            let s = states[j];
            let k1 = derivs[j];
            let k2 = slab_rhs(&rates, &(s + (0.5 * dt) * k1), fm, half);
            let k3 = slab_rhs(&rates, &(s + (0.5 * dt) * k2), fm, half);
            let k4 = slab_rhs(&rates, &(s + dt * k3), f1, half);
            let mut next = s.0;
            let w = dt / 6.0;
            for q in 0..9 {
                next[q] += w * (k1.0[q] + 2.0 * k2.0[q] + 2.0 * k3.0[q] + k4.0[q]);
            }
            let next = AtomState(next);
            let f_next = slab_rhs(&rates, &next, f1, half);
            let mut mid = [0.0; 9];
            for q in 0..9 {
                mid[q] = 0.5 * (s.0[q] + next.0[q]) + 0.125 * dt * (k1.0[q] - f_next.0[q]);
            }
            f0 = slab_output(&s, f0, full);
            fm = slab_output(&AtomState(mid), fm, full);
            f1 = slab_output(&next, f1, full);
            states[j] = next;
            derivs[j] = f_next;
        }
        let _ = f0;
        if !(f1.0.re.is_finite() && f1.0.im.is_finite() && f1.1.re.is_finite() && f1.1.im.is_finite()) {
            return Err(Error::PropagationFailure {
                z_index: z_steps,
                t_index: n + 1,
                detail: "non-finite output field".into(),
            });
        }
        energy_in += 0.5 * dt * (intensity(last_in) + intensity(entrance_end));
        energy_out += 0.5 * dt * (intensity(last_out) + intensity(f1));
        last_in = entrance_end;
        last_out = f1;

        if (n + 1) % options.check_every.max(1) == 0 || n + 1 == t_steps {
            for (j, s) in states.iter_mut().enumerate() {
                flush_negligible(s);
                s.to_density_matrix().check().map_err(|detail| Error::PropagationFailure {
                    z_index: j,
                    t_index: n + 1,
                    detail,
                })?;
            }
        }
        if (n + 1) % stride == 0 || n + 1 == t_steps {
            time.push(t + dt);
            input.push(entrance_end);
            output.push(f1);
        }
    }

    if energy_out > energy_in * (1.0 + ENERGY_TOL) {
        return Err(Error::PropagationFailure {
            z_index: z_steps,
            t_index: t_steps,
            detail: format!("output energy {energy_out:.9e} exceeds input {energy_in:.9e}"),
        });
    }

    let mut trace = project(&time, &output, options.detector_axis, options.extinction);
    let meta = &mut trace.metadata;
    meta.insert("b_field_t".into(), format!("{b_field:.9e}"));
    meta.insert("control_rabi_rad_s".into(), format!("{:.9e}", protocol.control_rabi));
    meta.insert("signal_peak_rad_s".into(), format!("{:.9e}", protocol.signal.peak));
    meta.insert("signal_duration_s".into(), format!("{:.9e}", protocol.signal.duration));
    meta.insert("control_off_s".into(), format!("{:.9e}", protocol.control_off));
    meta.insert("storage_time_s".into(), format!("{:.9e}", protocol.storage_time));
    meta.insert("gamma0_rad_s".into(), format!("{:.9e}", atom.gamma0));
    meta.insert("optical_depth".into(), format!("{:.9e}", medium.optical_depth()));
    meta.insert("z_steps".into(), z_steps.to_string());
    meta.insert("dt_s".into(), format!("{dt:.9e}"));
    meta.insert("extinction".into(), format!("{:.9e}", options.extinction));
    meta.insert("intensity_unit".into(), "(rad/s)^2".into());

    Ok(Simulation { trace, input, output, grid, medium, energy_in, energy_out })
}

/// Stationary state for the given entrance fields, or an unpolarized
/// ground mixture when the drive leaves it undetermined.
pub(crate) fn stationary_or_mixture(atom: &AtomSpec, drive: &DriveConfig) -> Result<DensityMatrix> {
    match steady_state(atom, drive) {
        Ok(rho) => Ok(rho),
        Err(Error::Degenerate { .. }) => DensityMatrix::ground_mixture(0.5, 0.5),
        Err(e) => Err(e),
    }
}
