use num_complex::Complex64;
use rustfft::FftPlanner;
use std::fmt::Write as _;
use std::f64::consts::{LN_2, PI};

use super::spectrum::parse_three_columns;
use super::{analytic_susceptibility, MediumParams, SusceptibilitySpectrum};
use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

/// Smallest FFT length used for pulse propagation.
pub const MIN_GRID: usize = 4096;
/// Largest tolerated fraction of pulse energy outside the resolved band.
const LEAKAGE_TOL: f64 = 1e-6;
/// Largest tolerated `|H|` excess before passivity counts as violated.
const PASSIVITY_TOL: f64 = 1e-9;

/// Gaussian pulse descriptor: `peak · exp(−2 ln2 (t − center)²/duration²)`,
/// so `duration` is the intensity FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub duration: f64,
    pub peak: Complex64,
    pub center: f64,
}

impl PulseShape {
    pub fn new(duration: f64, peak: Complex64, center: f64) -> Self {
        Self { duration, peak, center }
    }

    #[inline]
    pub fn amplitude(&self, t: f64) -> Complex64 {
        let x = (t - self.center) / self.duration;
        self.peak * (-2.0 * LN_2 * x * x).exp()
    }
}

/// Complex envelope on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    time: Vec<f64>,
    envelope: Vec<Complex64>,
    shape: PulseShape,
}

impl Pulse {
    pub fn new(time: Vec<f64>, envelope: Vec<Complex64>, shape: PulseShape) -> Result<Self> {
        if time.len() != envelope.len() || time.len() < 4 {
            return Err(Error::InvalidInput("pulse grid and envelope lengths differ or are too short".into()));
        }
        let dt = time[1] - time[0];
        if !(dt > 0.0) {
            return Err(Error::InvalidInput("time grid must increase".into()));
        }
        for w in time.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt + 1e-8 * w[1].abs() {
                return Err(Error::InvalidInput("time grid must be uniform".into()));
            }
        }
        if envelope.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("pulse envelope is not finite".into()));
        }
        let span = dt * time.len() as f64;
        if !(shape.duration > 0.0) || span < 8.0 * shape.duration * (1.0 - 1e-12) {
            return Err(Error::Grid(format!(
                "grid span {span:.3e} s shorter than 8 pulse durations ({:.3e} s)",
                shape.duration
            )));
        }
        Ok(Self { time, envelope, shape })
    }

    /// Samples `shape` on `n` points spaced `dt` from `t0`.
    pub fn gaussian(shape: PulseShape, n: usize, dt: f64, t0: f64) -> Result<Self> {
        let time: Vec<f64> = (0..n).map(|k| t0 + dt * k as f64).collect();
        let envelope = time.iter().map(|&t| shape.amplitude(t)).collect();
        Self::new(time, envelope, shape)
    }

    /// Gaussian on a power-of-two grid sized for a medium delaying by up to
    /// `expected_delay`: the span is `max(16 d, 8 d + 4 T)` with the pulse
    /// centred `4 d` after the start. `grid_scale` multiplies the point count.
    pub fn gaussian_for_medium(
        duration: f64,
        peak: Complex64,
        expected_delay: f64,
        grid_scale: f64,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) || !(grid_scale > 0.0) {
            return Err(Error::InvalidInput("duration and grid scale must be positive".into()));
        }
        let span = (16.0 * duration).max(8.0 * duration + 4.0 * expected_delay.abs());
        let n = ((MIN_GRID as f64 * grid_scale).ceil() as usize).next_power_of_two().max(MIN_GRID);
        let shape = PulseShape::new(duration, peak, 4.0 * duration);
        Self::gaussian(shape, n, span / n as f64, 0.0)
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.time[1] - self.time[0]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.envelope.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Σ |E|² dt`.
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dt()
    }

    /// Angular-frequency grid of the discrete spectrum, increasing, with
    /// `δ = 0` at index `n/2`.
    pub fn frequency_grid(&self) -> Vec<f64> {
        let n = self.len();
        let step = 2.0 * PI / (n as f64 * self.dt());
        (0..n).map(|m| (m as f64 - (n / 2) as f64) * step).collect()
    }

    /// CSV with columns `time_s,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,re,im\n");
        for (t, v) in self.time.iter().zip(&self.envelope) {
            let _ = writeln!(out, "{t:.8e},{:.8e},{:.8e}", v.re, v.im);
        }
        out
    }

    /// Reads a pulse written by [`Pulse::to_csv`]; `shape` describes it.
    pub fn from_csv(text: &str, shape: PulseShape) -> Result<Self> {
        let rows = parse_three_columns(text, "time_s")?;
        let time = rows.iter().map(|r| r[0]).collect();
        let env = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        Self::new(time, env, shape)
    }
}

/// Location (parabolically refined) and value of the maximum of `y`.
pub fn peak_time(time: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (i, &v) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(v > 0.0) {
        return None;
    }
    if i == 0 || i + 1 == y.len() {
        return Some((time[i], v));
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let den = a - 2.0 * b + c;
    let shift = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let h = time[i + 1] - time[i];
    Some((time[i] + shift * h, b - 0.25 * (a - c) * shift))
}

/// Full width at half maximum around the global maximum, with linearly
/// interpolated crossings. `None` if a half-maximum crossing is missing.
pub fn fwhm(time: &[f64], y: &[f64]) -> Option<f64> {
    let (i, &v) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(v > 0.0) {
        return None;
    }
    let half = 0.5 * v;
    let mut l = i;
    while l > 0 && y[l - 1] >= half {
        l -= 1;
    }
    if l == 0 {
        return None;
    }
    let tl = time[l - 1] + (half - y[l - 1]) / (y[l] - y[l - 1]) * (time[l] - time[l - 1]);
    let mut r = i;
    while r + 1 < y.len() && y[r + 1] >= half {
        r += 1;
    }
    if r + 1 == y.len() {
        return None;
    }
    let tr = time[r] + (y[r] - half) / (y[r] - y[r + 1]) * (time[r + 1] - time[r]);
    Some(tr - tl)
}

/// Cell transfer function `H(δ)` on a uniform increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    detuning: Vec<f64>,
    values: Vec<Complex64>,
}

impl TransferFunction {
    /// Checks passivity: `|H| > 1 + 1e-9` is a model error, smaller
    /// excesses are rounded back onto the unit circle.
    pub fn new(detuning: Vec<f64>, mut values: Vec<Complex64>) -> Result<Self> {
        if detuning.len() != values.len() || detuning.len() < 2 {
            return Err(Error::InvalidInput("transfer grid and values differ in length".into()));
        }
        for (d, h) in detuning.iter().zip(values.iter_mut()) {
            let m = h.norm();
            if !m.is_finite() {
                return Err(Error::Model(format!("non-finite transfer at δ = {d}")));
            }
            if m > 1.0 + PASSIVITY_TOL {
                return Err(Error::Model(format!("|H| = {m} > 1 at δ = {d}")));
            }
            if m > 1.0 {
                *h /= m;
            }
        }
        Ok(Self { detuning, values })
    }

    pub fn identity(detuning: Vec<f64>) -> Self {
        let n = detuning.len();
        Self { detuning, values: vec![Complex64::new(1.0, 0.0); n] }
    }

    /// Pure delay `T`: `H = e^{iδT}`.
    pub fn delay(detuning: Vec<f64>, delay: f64) -> Self {
        let values = detuning.iter().map(|d| Complex64::from_polar(1.0, d * delay)).collect();
        Self { detuning, values }
    }

    /// Analytic medium sampled on the spectral grid of `pulse`.
    pub fn for_pulse(pulse: &Pulse, params: &MediumParams) -> Result<Self> {
        let grid = pulse.frequency_grid();
        let spectrum =
            SusceptibilitySpectrum::from_fn(grid, |d| analytic_susceptibility(d, params))?;
        transfer_function(&spectrum, params)
    }

    pub fn detuning(&self) -> &[f64] {
        &self.detuning
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn interpolate(&self, d: f64) -> Option<Complex64> {
        let n = self.detuning.len();
        let (lo, hi) = (self.detuning[0], self.detuning[n - 1]);
        if d < lo || d > hi {
            return None;
        }
        let step = (hi - lo) / (n - 1) as f64;
        let x = (d - lo) / step;
        let k = (x.floor() as usize).min(n - 2);
        let f = x - k as f64;
        Some(self.values[k] * (1.0 - f) + self.values[k + 1] * f)
    }
}

/// `H(δ) = exp(i (ω/c)(χ(δ)/2) L)` for the spectrum's grid.
pub fn transfer_function(spectrum: &SusceptibilitySpectrum, params: &MediumParams) -> Result<TransferFunction> {
    let k = params.carrier / SPEED_OF_LIGHT;
    let i = Complex64::new(0.0, 1.0);
    let values = spectrum
        .chi()
        .iter()
        .map(|chi| {
            let h = (i * k * 0.5 * params.length * chi).exp();
            if h.re.is_finite() && h.im.is_finite() { h } else { Complex64::new(0.0, 0.0) }
        })
        .collect();
    TransferFunction::new(spectrum.detuning().to_vec(), values)
}

/// Output-to-input pulse comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    /// Peak intensity ratio `I'/I`.
    pub peak_ratio: f64,
    /// Intensity-FWHM ratio `Δ'/Δ`.
    pub width_ratio: f64,
    /// Peak-location shift (s).
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub output: Pulse,
    pub metrics: PulseMetrics,
    pub energy_in: f64,
    pub energy_out: f64,
}

fn edge_fraction(samples: &[f64], width: usize) -> f64 {
    let total: f64 = samples.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let n = samples.len();
    let edge: f64 = samples[..width].iter().sum::<f64>() + samples[n - width..].iter().sum::<f64>();
    edge / total
}

/// Multiplies the pulse spectrum by `h` and transforms back.
pub fn propagate_pulse(pulse: &Pulse, h: &TransferFunction) -> Result<Propagation> {
    let n = pulse.len();
    let dt = pulse.dt();
    let edge = (n / 32).max(1);

    let intensity_in = pulse.intensity();
    if edge_fraction(&intensity_in, edge) > LEAKAGE_TOL {
        return Err(Error::Grid("input pulse is not contained in the time window".into()));
    }

    // Spectrum in the e^{−iδt} convention: X_k = Σ x_n e^{+2πikn/N}.
    let mut planner = FftPlanner::<f64>::new();
    let mut spec = pulse.envelope().to_vec();
    planner.plan_fft_inverse(n).process(&mut spec);

    let power: Vec<f64> = spec.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    let nyquist_band: f64 = power
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let m = if *k < n / 2 { *k } else { n - *k };
            m >= 7 * n / 16
        })
        .map(|(_, p)| p)
        .sum();
    if total > 0.0 && nyquist_band / total > LEAKAGE_TOL {
        return Err(Error::Grid("pulse bandwidth reaches the Nyquist limit".into()));
    }

    let grid = pulse.frequency_grid();
    let dstep = grid[1] - grid[0];
    let direct = h.detuning.len() == n
        && (h.detuning[0] - grid[0]).abs() <= 1e-9 * dstep * n as f64
        && (h.detuning[n - 1] - grid[n - 1]).abs() <= 1e-9 * dstep * n as f64;
    let mut outside = 0.0;
    for k in 0..n {
        let m = (k + n / 2) % n;
        let hv = if direct {
            Some(h.values[m])
        } else {
            h.interpolate(grid[m])
        };
        match hv {
            Some(v) => spec[k] *= v,
            None => {
                outside += power[k];
                spec[k] = Complex64::new(0.0, 0.0);
            }
        }
    }
    if total > 0.0 && outside / total > LEAKAGE_TOL {
        return Err(Error::Grid(format!(
            "{:.2e} of the pulse energy lies outside the transfer grid",
            outside / total
        )));
    }

    planner.plan_fft_forward(n).process(&mut spec);
    let scale = 1.0 / n as f64;
    let envelope: Vec<Complex64> = spec.iter().map(|v| v * scale).collect();
    let output = Pulse::new(pulse.time.clone(), envelope, pulse.shape)?;

    let energy_in = pulse.energy();
    let energy_out = output.energy();
    if energy_out > energy_in * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Model(format!(
            "output energy {energy_out:.6e} exceeds input {energy_in:.6e}"
        )));
    }
    let intensity_out = output.intensity();
    if energy_in > 0.0 {
        let head: f64 = intensity_out[..edge].iter().sum::<f64>() * dt;
        if head / energy_in > LEAKAGE_TOL {
            return Err(Error::Grid("output pulse wraps around the time window".into()));
        }
    }

    let metrics = measure(pulse.time(), &intensity_in, &intensity_out)?;
    Ok(Propagation { output, metrics, energy_in, energy_out })
}

fn measure(time: &[f64], input: &[f64], output: &[f64]) -> Result<PulseMetrics> {
    let (t_in, p_in) =
        peak_time(time, input).ok_or_else(|| Error::InvalidInput("input pulse is zero".into()))?;
    let (t_out, p_out) =
        peak_time(time, output).ok_or_else(|| Error::Model("output pulse fully absorbed".into()))?;
    let w_in = fwhm(time, input).ok_or_else(|| Error::Grid("input FWHM not resolved".into()))?;
    let w_out = fwhm(time, output).ok_or_else(|| Error::Grid("output FWHM not resolved".into()))?;
    Ok(PulseMetrics {
        peak_ratio: p_out / p_in,
        width_ratio: w_out / w_in,
        delay: t_out - t_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_transfer_returns_input() {
        let p = Pulse::gaussian_for_medium(10e-6, c(1.0, 0.0), 0.0, 1.0).unwrap();
        let h = TransferFunction::identity(p.frequency_grid());
        let out = propagate_pulse(&p, &h).unwrap();
        for (a, b) in out.output.envelope().iter().zip(p.envelope()) {
            assert!((a - b).norm() <= 1e-12);
        }
        assert!(out.metrics.delay.abs() < 1e-15);
        assert!((out.metrics.width_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_delay_is_measured() {
        let p = Pulse::gaussian_for_medium(5e-6, c(1.0, 0.0), 20e-6, 1.0).unwrap();
        for t in [1.3e-6, 7.77e-6, 19e-6] {
            let h = TransferFunction::delay(p.frequency_grid(), t);
            let out = propagate_pulse(&p, &h).unwrap();
            assert!((out.metrics.delay - t).abs() <= p.dt(), "{} vs {t}", out.metrics.delay);
        }
    }

    #[test]
    fn interpolated_transfer_on_foreign_grid() {
        let p = Pulse::gaussian_for_medium(5e-6, c(1.0, 0.0), 10e-6, 1.0).unwrap();
        let grid = SusceptibilitySpectrum::grid(3e7, 200_001);
        let h = TransferFunction::delay(grid, 3e-6);
        let out = propagate_pulse(&p, &h).unwrap();
        assert!((out.metrics.delay - 3e-6).abs() <= p.dt());
        // A grid narrower than the pulse band is rejected.
        let narrow = TransferFunction::identity(SusceptibilitySpectrum::grid(1e4, 101));
        assert!(matches!(propagate_pulse(&p, &narrow), Err(Error::Grid(_))));
    }

    #[test]
    fn wrap_around_is_detected() {
        let p = Pulse::gaussian_for_medium(5e-6, c(1.0, 0.0), 0.0, 1.0).unwrap();
        let span = p.dt() * p.len() as f64;
        let h = TransferFunction::delay(p.frequency_grid(), 0.8 * span);
        assert!(matches!(propagate_pulse(&p, &h), Err(Error::Grid(_))));
    }

    #[test]
    fn passivity_violation_is_a_model_error() {
        let grid = vec![0.0, 1.0, 2.0];
        let vals = vec![c(1.0, 0.0), c(1.1, 0.0), c(1.0, 0.0)];
        assert!(matches!(TransferFunction::new(grid, vals), Err(Error::Model(_))));
    }

    #[test]
    fn constant_absorption_magnitude() {
        let params = MediumParams::new(0.01, 1.0, 1.0, 1e-3, 2.37e15).unwrap();
        let grid = SusceptibilitySpectrum::grid(1e6, 101);
        let spectrum = SusceptibilitySpectrum::from_fn(grid, |_| c(0.0, params.kappa)).unwrap();
        let h = transfer_function(&spectrum, &params).unwrap();
        let expected = (-params.carrier * params.kappa * params.length / (2.0 * SPEED_OF_LIGHT)).exp();
        for v in h.values() {
            assert!((v.norm() - expected).abs() <= 1e-12);
        }
        let zero = SusceptibilitySpectrum::from_fn(SusceptibilitySpectrum::grid(1.0, 5), |_| c(0.0, 0.0)).unwrap();
        assert!(transfer_function(&zero, &params).unwrap().values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn linear_index_is_pure_delay() {
        let params = MediumParams::new(1.0, 1.0, 1.0, 0.04, 2.37e15).unwrap();
        let slope = 2e-13;
        let grid = SusceptibilitySpectrum::grid(1e6, 101);
        let spectrum = SusceptibilitySpectrum::from_fn(grid.clone(), |d| c(slope * d, 0.0)).unwrap();
        let h = transfer_function(&spectrum, &params).unwrap();
        let t = 0.5 * params.carrier * params.length / SPEED_OF_LIGHT * slope;
        let expected = TransferFunction::delay(grid, t);
        for (a, b) in h.values().iter().zip(expected.values()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn short_grid_rejected() {
        let shape = PulseShape::new(1.0, c(1.0, 0.0), 3.0);
        assert!(matches!(Pulse::gaussian(shape, 64, 0.1, 0.0), Err(Error::Grid(_))));
    }

    #[test]
    fn fwhm_of_gaussian() {
        let p = Pulse::gaussian_for_medium(7e-6, c(2.0, 0.0), 0.0, 1.0).unwrap();
        let w = fwhm(p.time(), &p.intensity()).unwrap();
        assert!((w / 7e-6 - 1.0).abs() < 1e-4);
        let (t, v) = peak_time(p.time(), &p.intensity()).unwrap();
        assert!((t - 28e-6).abs() < 1e-3 * p.dt() + 1e-12 && (v - 4.0).abs() < 1e-3);
    }

    #[test]
    fn csv_round_trip() {
        let p = Pulse::gaussian_for_medium(7e-6, c(2.0, 0.5), 0.0, 1.0).unwrap();
        let back = Pulse::from_csv(&p.to_csv(), *p.shape()).unwrap();
        assert_eq!(back.len(), p.len());
    }
}
