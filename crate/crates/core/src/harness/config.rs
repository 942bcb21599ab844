use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::dispersion::{group_delay, MediumParams};
use crate::error::{Error, Result};
use crate::lambda_atom::AtomSpec;
use crate::maxwell_bloch::{MbOptions, SignalPulse, StorageProtocol};
use crate::units::{carrier_from_wavelength, celsius_to_kelvin, hz_to_rad, milligauss_to_tesla, wavenumber};
use crate::vapor::{kappa_from_cell, CellConfig, Isotope};

/// What a sweep measures at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Pulse delay and reshaping through the analytic EIT medium.
    Slowing,
    /// Maxwell–Bloch storage run plus a leakage reference.
    Storage,
    /// Stationary polarization rotation of a control-only (or control plus
    /// signal) beam.
    RotationSteady,
    /// Switch-induced rotation after the control returns.
    Sir,
    /// Weak-probe delay as the vapor density changes with temperature.
    DelayVsDensity,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "slowing" => Self::Slowing,
            "storage" => Self::Storage,
            "rotation_steady" => Self::RotationSteady,
            "sir" => Self::Sir,
            "delay_vs_density" => Self::DelayVsDensity,
            other => return Err(Error::Usage(format!("unknown experiment kind `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Slowing => "slowing",
            Self::Storage => "storage",
            Self::RotationSteady => "rotation_steady",
            Self::Sir => "sir",
            Self::DelayVsDensity => "delay_vs_density",
        }
    }

    /// Result columns, after the swept parameter and before `status`.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::Slowing => &["delay_s", "width_ratio", "peak_ratio", "analytic_delay_s"],
            Self::Storage => &["eta", "eta_trace_wise", "eta_peak_wise", "transmitted_peak", "leakage_dominated"],
            Self::RotationSteady => &[
                "delta_theta_rad",
                "output_angle_rad",
                "signal_port",
                "signal_ideal",
                "control_port",
            ],
            Self::Sir => &["sir_peak"],
            Self::DelayVsDensity => &["density_cm3", "delay_s", "analytic_delay_s", "width_ratio", "peak_ratio"],
        }
    }
}

/// Swept parameters understood by [`Scenario::apply`].
pub const PARAMETERS: &[&str] = &[
    "duration_us",
    "gamma0_hz",
    "storage_us",
    "b_mg",
    "temperature_c",
    "optical_depth",
    "window_khz",
    "control_rabi_mhz",
    "detuning_mhz",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: String,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
    sweep: RawSweep,
    #[serde(default)]
    cell: CellSection,
    #[serde(default)]
    atom: AtomSection,
    #[serde(default)]
    medium: MediumSection,
    #[serde(default)]
    protocol: ProtocolSection,
    #[serde(default)]
    detection: DetectionSection,
    #[serde(default)]
    grid: GridSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
    #[serde(default = "yes")]
    spot_check: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub temperature_c: f64,
    pub isotope: String,
    pub length_cm: f64,
    pub diameter_cm: f64,
    pub buffer_gas_torr: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            temperature_c: 65.0,
            isotope: "Rb87".into(),
            length_cm: 4.0,
            diameter_cm: 2.0,
            buffer_gas_torr: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomSection {
    /// Overrides the default ground-coherence decay (Hz).
    pub gamma0_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumSection {
    /// Resonant intensity optical depth at the configured temperature.
    pub optical_depth: f64,
    /// Transparency half-width; sets the control Rabi frequency.
    pub window_khz: f64,
    /// Explicit control Rabi frequency (cyclic MHz); overrides the window.
    pub control_rabi_mhz: Option<f64>,
    pub detuning_mhz: f64,
}

impl Default for MediumSection {
    fn default() -> Self {
        Self { optical_depth: 20.0, window_khz: 50.0, control_rabi_mhz: None, detuning_mhz: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    /// Signal intensity FWHM.
    pub duration_us: f64,
    /// Signal peak Rabi frequency relative to the control.
    pub signal_fraction: f64,
    /// Signal phase relative to the control (rad).
    pub signal_phase: f64,
    pub storage_us: f64,
    /// Control switch-off after the signal centre, in group delays.
    pub off_delay: f64,
    /// Absolute switch-off time; overrides `off_delay`.
    pub control_off_us: Option<f64>,
    pub b_mg: f64,
    /// σ⁺ control amplitude relative to σ⁻.
    pub plus_scale: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            duration_us: 10.0,
            signal_fraction: 0.1,
            signal_phase: 0.0,
            storage_us: 130.0,
            off_delay: 0.5,
            control_off_us: None,
            b_mg: 0.0,
            plus_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    /// Signal-port axis from the control polarization (degrees).
    pub detector_axis_deg: f64,
    pub extinction: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self { detector_axis_deg: 90.0, extinction: crate::polarimetry::DEFAULT_EXTINCTION }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub z_steps: usize,
    /// Time step (ns); the stability bound when absent.
    pub dt_ns: Option<f64>,
    /// Multiplies every resolution (slabs, time steps, FFT points).
    pub scale: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { z_steps: 50, dt_ns: None, scale: 1.0 }
    }
}

/// A validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: ExperimentKind,
    pub parameter: String,
    pub values: Vec<f64>,
    /// Seeds the spot-check row choice only.
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub spot_check: bool,
    pub cell: CellSection,
    pub atom: AtomSection,
    pub medium: MediumSection,
    pub protocol: ProtocolSection,
    pub detection: DetectionSection,
    pub grid: GridSection,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let config = Self {
            kind: ExperimentKind::parse(&raw.kind)?,
            parameter: raw.sweep.parameter,
            values: raw.sweep.values,
            seed: raw.seed,
            output: raw.output,
            spot_check: raw.sweep.spot_check,
            cell: raw.cell,
            atom: raw.atom,
            medium: raw.medium,
            protocol: raw.protocol,
            detection: raw.detection,
            grid: raw.grid,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !PARAMETERS.contains(&self.parameter.as_str()) {
            return Err(Error::Usage(format!(
                "unknown sweep parameter `{}` (expected one of {})",
                self.parameter,
                PARAMETERS.join(", ")
            )));
        }
        if self.values.is_empty() {
            return Err(Error::Configuration("sweep grid is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("sweep grid contains non-finite values".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Configuration("sweep grid must be strictly monotone".into()));
        }
        if !(self.grid.scale > 0.0 && self.grid.scale.is_finite()) {
            return Err(Error::Configuration("grid scale must be positive".into()));
        }
        Scenario::from_config(self).map(|_| ())
    }

    /// Scenario at one grid value.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario> {
        Scenario::from_config(self)?.apply(&self.parameter, value)
    }
}

/// Physical and numerical settings of a single run, in SI units.
///
/// The optical depth and window are those at the configured temperature;
/// they fix the share of resonant atoms and the control Rabi frequency,
/// which then stay put when the temperature is swept.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cell: CellConfig,
    pub atom: AtomSpec,
    /// Share of the atoms that interact with the narrow-band fields.
    pub resonant_fraction: f64,
    pub control_rabi: f64,
    pub detuning: f64,
    pub duration: f64,
    pub signal_fraction: f64,
    pub signal_phase: f64,
    pub storage_time: f64,
    pub off_delay: f64,
    pub control_off: Option<f64>,
    pub b_field: f64,
    pub plus_scale: f64,
    pub detector_axis: f64,
    pub extinction: f64,
    pub z_steps: usize,
    pub dt: Option<f64>,
    pub grid_scale: f64,
}

impl Scenario {
    pub fn from_config(config: &SweepConfig) -> Result<Self> {
        let c = &config.cell;
        let mut cell = CellConfig::reference(celsius_to_kelvin(c.temperature_c), c.isotope.parse::<Isotope>()?);
        cell.length = c.length_cm * 1e-2;
        cell.diameter = c.diameter_cm * 1e-2;
        cell.buffer_gas_torr = c.buffer_gas_torr;
        let mut atom = AtomSpec::default();
        if let Some(g0) = config.atom.gamma0_hz {
            atom.gamma0 = hz_to_rad(g0);
        }
        let p = &config.protocol;
        let mut s = Self {
            cell,
            atom,
            resonant_fraction: 1.0,
            control_rabi: 1.0,
            detuning: hz_to_rad(config.medium.detuning_mhz * 1e6),
            duration: p.duration_us * 1e-6,
            signal_fraction: p.signal_fraction,
            signal_phase: p.signal_phase,
            storage_time: p.storage_us * 1e-6,
            off_delay: p.off_delay,
            control_off: p.control_off_us.map(|t| t * 1e-6),
            b_field: milligauss_to_tesla(p.b_mg),
            plus_scale: p.plus_scale,
            detector_axis: config.detection.detector_axis_deg.to_radians(),
            extinction: config.detection.extinction,
            z_steps: config.grid.z_steps,
            dt: config.grid.dt_ns.map(|t| t * 1e-9),
            grid_scale: config.grid.scale,
        };
        s.set_optical_depth(config.medium.optical_depth)?;
        match config.medium.control_rabi_mhz {
            Some(f) => s.control_rabi = hz_to_rad(f * 1e6),
            None => s.set_window(hz_to_rad(config.medium.window_khz * 1e3))?,
        }
        s.validate()?;
        Ok(s)
    }

    /// Returns a copy with `parameter` set to `value` (in config units).
    pub fn apply(mut self, parameter: &str, value: f64) -> Result<Self> {
        match parameter {
            "duration_us" => self.duration = value * 1e-6,
            "gamma0_hz" => self.atom.gamma0 = hz_to_rad(value),
            "storage_us" => self.storage_time = value * 1e-6,
            "b_mg" => self.b_field = milligauss_to_tesla(value),
            "temperature_c" => self.cell.temperature = celsius_to_kelvin(value),
            "optical_depth" => self.set_optical_depth(value)?,
            "window_khz" => self.set_window(hz_to_rad(value * 1e3))?,
            "control_rabi_mhz" => self.control_rabi = hz_to_rad(value * 1e6),
            "detuning_mhz" => self.detuning = hz_to_rad(value * 1e6),
            other => return Err(Error::Usage(format!("unknown sweep parameter `{other}`"))),
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.cell.validate()?;
        self.atom.validate()?;
        for (name, v) in [
            ("duration", self.duration),
            ("storage time", self.storage_time),
            ("control Rabi frequency", self.control_rabi),
            ("σ⁺ scale", self.plus_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.signal_fraction >= 0.0 && self.signal_fraction.is_finite()) {
            return Err(Error::Configuration("signal fraction must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.extinction) {
            return Err(Error::Configuration("extinction must lie in [0, 1]".into()));
        }
        if !(self.resonant_fraction > 0.0 && self.resonant_fraction <= 1.0) {
            return Err(Error::Configuration(format!(
                "optical depth needs a resonant fraction of {:.3e}; the cell is too thin",
                self.resonant_fraction
            )));
        }
        Ok(())
    }

    fn set_optical_depth(&mut self, od: f64) -> Result<()> {
        if !(od > 0.0 && od.is_finite()) {
            return Err(Error::Configuration(format!("optical depth must be positive, got {od}")));
        }
        let full = kappa_from_cell(&self.cell)? * wavenumber(self.cell.isotope.wavelength()) * self.cell.length;
        self.resonant_fraction = od / full;
        Ok(())
    }

    /// `Ω_c² = 2γ√d · W`, the control that opens a half-width `W` in the
    /// density-matrix medium.
    fn set_window(&mut self, window: f64) -> Result<()> {
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Configuration(format!("window must be positive, got {window}")));
        }
        let od = self.optical_depth()?;
        self.control_rabi = (2.0 * self.atom.gamma * od.sqrt() * window).sqrt();
        Ok(())
    }

    /// Effective density constant of the resonant atoms.
    pub fn kappa(&self) -> Result<f64> {
        Ok(kappa_from_cell(&self.cell)? * self.resonant_fraction)
    }

    pub fn optical_depth(&self) -> Result<f64> {
        Ok(self.kappa()? * wavenumber(self.cell.isotope.wavelength()) * self.cell.length)
    }

    /// Resonant-atom density (cm⁻³).
    pub fn resonant_density(&self) -> Result<f64> {
        Ok(self.cell.isotope_density()? * self.resonant_fraction)
    }

    /// Equivalent analytic EIT medium.
    pub fn medium_params(&self) -> Result<MediumParams> {
        let wavelength = self.cell.isotope.wavelength();
        MediumParams::for_atom(
            self.kappa()?,
            &self.atom,
            self.control_rabi,
            self.cell.length,
            carrier_from_wavelength(wavelength),
        )
    }

    /// Transparency half-width (rad/s).
    pub fn window(&self) -> Result<f64> {
        let p = self.medium_params()?;
        Ok(crate::dispersion::eit_window(&p, p.wavenumber()))
    }

    pub fn group_delay(&self) -> Result<f64> {
        Ok(group_delay(&self.medium_params()?))
    }

    pub fn mb_options(&self) -> MbOptions {
        MbOptions {
            z_steps: self.z_steps,
            dt: self.dt,
            grid_scale: self.grid_scale,
            resonant_fraction: self.resonant_fraction,
            detuning: self.detuning,
            plus_scale: self.plus_scale,
            extinction: self.extinction,
            detector_axis: self.detector_axis,
            ..MbOptions::default()
        }
    }

    pub fn signal_pulse(&self) -> SignalPulse {
        let mut s = SignalPulse::new(self.duration, self.signal_fraction * self.control_rabi);
        s.phase = self.signal_phase;
        s
    }

    /// Storage sequence: the control switches off `off_delay` group delays
    /// after the signal centre (or at `control_off`) and returns after the
    /// storage time.
    pub fn storage_protocol(&self) -> Result<StorageProtocol> {
        let signal = self.signal_pulse();
        let off = match self.control_off {
            Some(t) => t,
            None => signal.center + self.off_delay * self.group_delay()?,
        };
        let p = StorageProtocol::storage(signal, self.control_rabi, off, self.storage_time);
        p.validate()?;
        Ok(p)
    }

    /// The storage sequence with the signal removed.
    pub fn leakage_protocol(&self) -> Result<StorageProtocol> {
        let mut p = self.storage_protocol()?;
        p.signal.peak = 0.0;
        Ok(p)
    }
}
