use rayon::prelude::*;

use super::{simulate, DetectorTrace, MbOptions, Simulation, StorageProtocol};
use crate::dispersion::peak_time;
use crate::error::{Error, Result};
use crate::lambda_atom::AtomSpec;
use crate::vapor::CellConfig;

/// Storage efficiency of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    /// Trace-wise corrected efficiency, clamped to `[0, 1]`.
    pub eta: f64,
    /// `max(signal − leakage)` over the post window divided by the input peak.
    pub trace_wise: f64,
    /// `(max signal − max leakage)` over the post window divided by the input peak.
    pub peak_wise: f64,
    /// Set when the leakage exceeds the signal everywhere in the window.
    pub negative: bool,
    /// Input signal-port peak intensity at the cell entrance.
    pub input_peak: f64,
}

/// `η = max_post(signal − leakage) / input peak`, where the post window is
/// `[control re-on, re-on + 5 durations]` and the input peak is the
/// entrance signal intensity `|Ω_s|²`.
pub fn storage_efficiency(
    trace: &DetectorTrace,
    protocol: &StorageProtocol,
    leakage: &DetectorTrace,
) -> Result<Efficiency> {
    let input_peak = protocol.signal.peak * protocol.signal.peak;
    if !(input_peak > 0.0) {
        return Err(Error::InvalidInput("protocol has no signal pulse".into()));
    }
    if trace.time.len() != leakage.time.len()
        || trace.time.iter().zip(&leakage.time).any(|(a, b)| (a - b).abs() > 1e-15 + 1e-12 * a.abs())
    {
        return Err(Error::InvalidInput("leakage reference is sampled on a different grid".into()));
    }
    let t0 = protocol.control_on();
    let range = trace.window(t0, t0 + protocol.post_window());
    if range.is_empty() {
        return Err(Error::InvalidInput("post-storage window contains no samples".into()));
    }
    let corrected = range
        .clone()
        .map(|k| trace.signal[k] - leakage.signal[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let max_sig = range.clone().map(|k| trace.signal[k]).fold(f64::NEG_INFINITY, f64::max);
    let max_leak = range.map(|k| leakage.signal[k]).fold(f64::NEG_INFINITY, f64::max);
    let trace_wise = corrected / input_peak;
    Ok(Efficiency {
        eta: trace_wise.clamp(0.0, 1.0),
        trace_wise,
        peak_wise: (max_sig - max_leak) / input_peak,
        negative: corrected < 0.0,
        input_peak,
    })
}

/// Transmitted-signal delay (s) of a slowing run: the shift between the
/// peaks of the ideal entrance and exit signal-port intensities.
pub fn slowing_delay(sim: &Simulation, detector_axis: f64) -> Result<f64> {
    let input = sim.input_trace(detector_axis);
    let output = sim.ideal_trace(detector_axis);
    let (t_in, _) = peak_time(&input.time, &input.signal)
        .ok_or_else(|| Error::InvalidInput("no signal at the entrance".into()))?;
    let (t_out, _) = peak_time(&output.time, &output.signal)
        .ok_or_else(|| Error::Model("signal fully absorbed".into()))?;
    Ok(t_out - t_in)
}

/// Switch-induced rotation at one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirPoint {
    pub b_field: f64,
    /// Largest ideal signal-port intensity after the control returns.
    pub peak: f64,
    /// `peak` relative to the entrance control intensity `Ω_c²`.
    pub relative: f64,
}

/// Runs the control-only protocol at every field in `b_grid` and reports
/// the transient signal-port peak in the post window. Splitter leakage is
/// excluded so that only polarization rotation contributes.
pub fn sir_scan(
    b_grid: &[f64],
    protocol: &StorageProtocol,
    cell: &CellConfig,
    atom: &AtomSpec,
    options: &MbOptions,
) -> Result<Vec<SirPoint>> {
    if protocol.signal.peak != 0.0 {
        return Err(Error::InvalidInput("SIR scans require a protocol without signal".into()));
    }
    if !protocol.is_storage() {
        return Err(Error::InvalidInput("SIR scans require a control switch".into()));
    }
    b_grid
        .par_iter()
        .map(|&b| {
            let sim = simulate(protocol, cell, atom, b, options)?;
            let ideal = sim.ideal_trace(options.detector_axis);
            let t0 = protocol.control_on();
            let (_, peak) = ideal
                .signal_peak(t0, t0 + protocol.post_window())
                .ok_or_else(|| Error::InvalidInput("post window contains no samples".into()))?;
            let c2 = protocol.control_rabi * protocol.control_rabi;
            Ok(SirPoint { b_field: b, peak, relative: peak / c2 })
        })
        .collect()
}
