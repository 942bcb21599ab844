use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use crate::error::{Error, Result};

/// Default control switching time (acousto-optic modulator).
pub const CONTROL_RISE: f64 = 1e-6;
/// Default signal gate edge (Pockels cell).
pub const SIGNAL_RISE: f64 = 100e-9;

/// Raised-cosine step from 0 at `start` to 1 at `start + rise`.
#[inline]
pub fn ramp(t: f64, start: f64, rise: f64) -> f64 {
    let x = ((t - start) / rise).clamp(0.0, 1.0);
    0.5 * (1.0 - (PI * x).cos())
}

/// Gaussian signal pulse, y-polarized at the cell entrance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalPulse {
    /// Intensity FWHM (s).
    pub duration: f64,
    /// Peak Rabi frequency (rad/s); zero for control-only runs.
    pub peak: f64,
    /// Time of the maximum (s).
    pub center: f64,
    /// Phase relative to the control (rad).
    pub phase: f64,
}

impl SignalPulse {
    /// Pulse of `duration` centred at `2 · duration`.
    pub fn new(duration: f64, peak: f64) -> Self {
        Self { duration, peak, center: 2.0 * duration, phase: 0.0 }
    }

    pub fn none(duration: f64) -> Self {
        Self::new(duration, 0.0)
    }
}

/// Control/signal timing of a storage (or slowing) run in retarded time.
///
/// The x-polarized control has total Rabi frequency `control_rabi` and ramps
/// off over `[control_off, control_off + rise]`, then back on from
/// `control_off + storage_time`. An infinite `control_off` keeps it on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageProtocol {
    pub signal: SignalPulse,
    pub control_rabi: f64,
    pub control_off: f64,
    pub storage_time: f64,
    pub control_rise: f64,
    pub signal_rise: f64,
    /// End of the simulated interval (s).
    pub end_time: f64,
}

impl StorageProtocol {
    /// Storage run ending five pulse durations after the control returns.
    pub fn storage(signal: SignalPulse, control_rabi: f64, control_off: f64, storage_time: f64) -> Self {
        let mut p = Self {
            signal,
            control_rabi,
            control_off,
            storage_time,
            control_rise: CONTROL_RISE,
            signal_rise: SIGNAL_RISE,
            end_time: 0.0,
        };
        p.end_time = p.control_on() + p.post_window();
        p
    }

    /// Control permanently on; the run ends at `end_time`.
    pub fn slowing(signal: SignalPulse, control_rabi: f64, end_time: f64) -> Self {
        Self {
            signal,
            control_rabi,
            control_off: f64::INFINITY,
            storage_time: 0.0,
            control_rise: CONTROL_RISE,
            signal_rise: SIGNAL_RISE,
            end_time,
        }
    }

    pub fn is_storage(&self) -> bool {
        self.control_off.is_finite()
    }

    /// Start of the control re-on ramp.
    pub fn control_on(&self) -> f64 {
        self.control_off + self.storage_time
    }

    /// Length of the post-storage observation window.
    pub fn post_window(&self) -> f64 {
        5.0 * self.signal.duration
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.signal;
        if !(s.duration > 0.0 && s.duration.is_finite()) {
            return Err(Error::InvalidInput("signal duration must be positive".into()));
        }
        if !(s.peak >= 0.0 && s.peak.is_finite() && s.center.is_finite() && s.phase.is_finite()) {
            return Err(Error::InvalidInput("signal peak, center and phase must be finite".into()));
        }
        if !(self.control_rabi >= 0.0 && self.control_rabi.is_finite()) {
            return Err(Error::InvalidInput("control Rabi frequency must be finite and non-negative".into()));
        }
        if !(self.control_rise > 0.0 && self.signal_rise > 0.0) {
            return Err(Error::InvalidInput("rise times must be positive".into()));
        }
        if self.is_storage() {
            if s.peak > 0.0 && self.control_off <= s.center {
                return Err(Error::InvalidInput(
                    "control must switch off after the signal pulse center".into(),
                ));
            }
            if !(self.storage_time > 0.0 && self.storage_time.is_finite()) {
                return Err(Error::InvalidInput("storage time must be positive".into()));
            }
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::InvalidInput("end time must be positive".into()));
        }
        Ok(())
    }

    /// Control level in `[0, 1]`.
    #[inline]
    pub fn control_level(&self, t: f64) -> f64 {
        if !self.is_storage() {
            return 1.0;
        }
        1.0 - ramp(t, self.control_off, self.control_rise) + ramp(t, self.control_on(), self.control_rise)
    }

    /// Signal Rabi frequency (complex, gated) at the entrance.
    #[inline]
    pub fn signal_amplitude(&self, t: f64) -> Complex64 {
        let s = &self.signal;
        if s.peak == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let close = s.center + 2.0 * s.duration;
        let gate = ramp(t, 0.0, self.signal_rise) * (1.0 - ramp(t, close, self.signal_rise));
        let x = (t - s.center) / s.duration;
        Complex64::from_polar(s.peak * gate * (-2.0 * LN_2 * x * x).exp(), s.phase)
    }

    /// Entrance `(Ω⁺, Ω⁻)`: x-polarized control plus y-polarized signal, with
    /// the σ⁺ share scaled by `plus_scale` (unequal circular intensities).
    #[inline]
    pub fn entrance_fields(&self, t: f64, plus_scale: f64) -> (Complex64, Complex64) {
        let c = self.control_rabi * self.control_level(t) * FRAC_1_SQRT_2;
        let s = self.signal_amplitude(t) * FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        ((c + i * s) * plus_scale, Complex64::new(c, 0.0) - i * s)
    }

    /// Largest entrance `|Ω±|` over the run.
    pub fn max_rabi(&self, plus_scale: f64) -> f64 {
        (self.control_rabi + self.signal.peak) * FRAC_1_SQRT_2 * plus_scale.max(1.0)
    }
}
