use num_complex::Complex64;

use super::sweep::Dataset;
use crate::dispersion::{group_delay, propagate_pulse, MediumParams, Pulse, TransferFunction};
use crate::error::{Error, Result};
use crate::units::{hz_to_rad, rad_to_hz};

/// Window search range (cyclic Hz).
pub const FIT_RANGE_HZ: (f64, f64) = (2e3, 5e6);
const SCAN_POINTS: usize = 49;
const MAX_ITERATIONS: usize = 100;
const REL_TOL: f64 = 1e-6;

/// Width-ratio measurements of a slowing sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowingData {
    pub optical_depth: f64,
    /// Optical coherence decay rate of the medium (rad/s).
    pub gamma: f64,
    pub length: f64,
    pub carrier: f64,
    /// Input intensity FWHM (s).
    pub durations: Vec<f64>,
    pub width_ratios: Vec<f64>,
}

impl SlowingData {
    /// Reads a `slowing` dataset swept over `duration_us`.
    pub fn from_dataset(data: &Dataset) -> Result<Self> {
        if data.metadata.get("kind").map(String::as_str) != Some("slowing") {
            return Err(Error::InvalidInput("fit needs a slowing dataset".into()));
        }
        let durations = data
            .column("duration_us")
            .ok_or_else(|| Error::InvalidInput("dataset is not swept over duration_us".into()))?;
        let ratios = data
            .column("width_ratio")
            .ok_or_else(|| Error::InvalidInput("dataset has no width_ratio column".into()))?;
        let (durations, width_ratios): (Vec<f64>, Vec<f64>) = durations
            .iter()
            .zip(&ratios)
            .zip(&data.status)
            .filter(|((d, w), s)| s.as_str() == "ok" && d.is_finite() && w.is_finite())
            .map(|((d, w), _)| (d * 1e-6, *w))
            .unzip();
        Ok(Self {
            optical_depth: data.meta_f64("optical_depth")?,
            gamma: data.meta_f64("coherence_decay_rad_s")?,
            length: data.meta_f64("length_m")?,
            carrier: data.meta_f64("carrier_rad_s")?,
            durations,
            width_ratios,
        })
    }

    /// Predicted width ratios for a transparency half-width `window` (rad/s).
    pub fn model(&self, window: f64) -> Result<Vec<f64>> {
        let params = MediumParams::from_window(self.optical_depth, window, self.gamma, self.length, self.carrier)?;
        let delay = group_delay(&params);
        self.durations
            .iter()
            .map(|&d| {
                let pulse = Pulse::gaussian_for_medium(d, Complex64::new(1.0, 0.0), delay, 1.0)?;
                let h = TransferFunction::for_pulse(&pulse, &params)?;
                Ok(propagate_pulse(&pulse, &h)?.metrics.width_ratio)
            })
            .collect()
    }

    /// Euclidean norm of the model misfit; unusable models count as infinite.
    pub fn residual(&self, window: f64) -> f64 {
        match self.model(window) {
            Ok(m) => m
                .iter()
                .zip(&self.width_ratios)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Fitted transparency window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFit {
    /// Half-width (Hz).
    pub window_hz: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Fits the single window width of the EIT transmission model to a slowing
/// dataset given as CSV text.
pub fn fit_transparency_window(csv: &str) -> Result<WindowFit> {
    let data = SlowingData::from_dataset(&Dataset::parse(csv)?)?;
    fit_window(&data)
}

/// Log-spaced scan over [`FIT_RANGE_HZ`] followed by golden-section
/// refinement in `ln W`. An optimum on the scan boundary means the data
/// do not identify the window.
pub fn fit_window(data: &SlowingData) -> Result<WindowFit> {
    if data.durations.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 durations, got {}",
            data.durations.len()
        )));
    }
    let (lo, hi) = (hz_to_rad(FIT_RANGE_HZ.0).ln(), hz_to_rad(FIT_RANGE_HZ.1).ln());
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let scan: Vec<f64> = grid.iter().map(|x| data.residual(x.exp())).collect();
    let best = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty scan");
    let fail = |iterations: usize, x: f64, reason: &str| Error::Fit {
        iterations,
        best_window_hz: rad_to_hz(x.exp()),
        residual: data.residual(x.exp()),
        reason: reason.into(),
    };
    if !scan[best].is_finite() {
        return Err(fail(SCAN_POINTS, grid[best], "model undefined over the whole range"));
    }
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(fail(SCAN_POINTS, grid[best], "optimum on the edge of the search range"));
    }

    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (data.residual(c.exp()), data.residual(d.exp()));
    for it in 0..MAX_ITERATIONS {
        if (b - a).abs() < REL_TOL {
            let x = 0.5 * (a + b);
            return Ok(WindowFit {
                window_hz: rad_to_hz(x.exp()),
                residual: data.residual(x.exp()),
                iterations: SCAN_POINTS + it,
            });
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = data.residual(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = data.residual(d.exp());
        }
    }
    Err(fail(SCAN_POINTS + MAX_ITERATIONS, 0.5 * (a + b), "golden section did not converge"))
}
