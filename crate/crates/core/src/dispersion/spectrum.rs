use num_complex::Complex64;
use std::fmt::Write as _;
use std::f64::consts::PI;

use super::{analytic_susceptibility, group_delay, MediumParams};
use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

/// Relative tolerance on grid uniformity (CSV round trips keep 9 digits).
const UNIFORM_TOL: f64 = 1e-7;
/// Most negative `χ''` accepted as round-off.
const PASSIVITY_TOL: f64 = 1e-12;
/// Largest acceptable estimated relative error of a finite-difference delay.
const DELAY_RESOLUTION: f64 = 1e-3;

/// Complex susceptibility on a uniform, increasing detuning grid (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilitySpectrum {
    detuning: Vec<f64>,
    chi: Vec<Complex64>,
}

impl SusceptibilitySpectrum {
    pub fn new(detuning: Vec<f64>, chi: Vec<Complex64>) -> Result<Self> {
        if detuning.len() != chi.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but {} values",
                detuning.len(),
                chi.len()
            )));
        }
        if detuning.len() < 3 {
            return Err(Error::InvalidInput("spectrum needs at least 3 points".into()));
        }
        let step = detuning[1] - detuning[0];
        if !(step > 0.0) {
            return Err(Error::InvalidInput("detuning grid must increase".into()));
        }
        for w in detuning.windows(2) {
            let d = w[1] - w[0];
            if !(d > 0.0) || (d - step).abs() > UNIFORM_TOL * step.max(w[1].abs()) {
                return Err(Error::InvalidInput("detuning grid must be uniform".into()));
            }
        }
        for (d, x) in detuning.iter().zip(&chi) {
            if !(x.re.is_finite() && x.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite χ at δ = {d}")));
            }
            if x.im < -PASSIVITY_TOL {
                return Err(Error::Model(format!("χ'' = {:.3e} < 0 at δ = {d}", x.im)));
            }
        }
        Ok(Self { detuning, chi })
    }

    /// Uniform grid of `n` points (`n` odd keeps `δ = 0` on the grid).
    pub fn grid(half_span: f64, n: usize) -> Vec<f64> {
        let step = 2.0 * half_span / (n - 1) as f64;
        (0..n).map(|k| -half_span + step * k as f64).collect()
    }

    pub fn from_fn(detuning: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let chi = detuning.iter().map(|&d| f(d)).collect();
        Self::new(detuning, chi)
    }

    pub fn analytic(params: &MediumParams, half_span: f64, n: usize) -> Result<Self> {
        Self::from_fn(Self::grid(half_span, n), |d| analytic_susceptibility(d, params))
    }

    pub fn detuning(&self) -> &[f64] {
        &self.detuning
    }

    pub fn chi(&self) -> &[Complex64] {
        &self.chi
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.detuning[self.len() - 1] - self.detuning[0]) / (self.len() - 1) as f64
    }

    /// Group delay from a central difference of `χ'` at `δ = 0`.
    ///
    /// The truncation error is estimated from the doubled stencil; an
    /// estimate above 1e-3 relative is reported as a resolution error.
    pub fn group_delay_numeric(&self, length: f64, carrier: f64) -> Result<f64> {
        let h = self.spacing();
        let (i0, d0) = self
            .detuning
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, d)| (i, *d))
            .expect("non-empty grid");
        if d0.abs() > 1e-6 * h {
            return Err(Error::Resolution("grid does not contain δ = 0".into()));
        }
        if i0 < 2 || i0 + 2 >= self.len() {
            return Err(Error::Resolution("δ = 0 too close to the grid edge".into()));
        }
        let x = |k: usize| self.chi[k].re;
        let d1 = (x(i0 + 1) - x(i0 - 1)) / (2.0 * h);
        let d2 = (x(i0 + 2) - x(i0 - 2)) / (4.0 * h);
        let err = (d2 - d1).abs() / 3.0;
        if err > DELAY_RESOLUTION * d1.abs() {
            return Err(Error::Resolution(format!(
                "estimated slope error {:.2e} relative",
                err / d1.abs()
            )));
        }
        Ok(length / SPEED_OF_LIGHT * 0.5 * carrier * d1)
    }

    /// Relative difference between the numeric and analytic delays.
    pub fn delay_discrepancy(&self, params: &MediumParams) -> Result<f64> {
        let num = self.group_delay_numeric(params.length, params.carrier)?;
        let ana = group_delay(params);
        Ok(((num - ana) / ana).abs())
    }

    /// CSV with columns `detuning_hz,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detuning_hz,re,im\n");
        for (d, x) in self.detuning.iter().zip(&self.chi) {
            let _ = writeln!(out, "{:.8e},{:.8e},{:.8e}", d / (2.0 * PI), x.re, x.im);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_three_columns(text, "detuning_hz")?;
        let detuning = rows.iter().map(|r| r[0] * 2.0 * PI).collect();
        let chi = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        Self::new(detuning, chi)
    }
}

/// Parses a headed three-column CSV, skipping `#` comments.
pub(crate) fn parse_three_columns(text: &str, first: &str) -> Result<Vec<[f64; 3]>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if !header.starts_with(first) {
        return Err(Error::Parse(format!("expected header starting with {first}, got {header}")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", n + 1)))?;
        if vals.len() != 3 {
            return Err(Error::Parse(format!("row {}: expected 3 columns", n + 1)));
        }
        rows.push([vals[0], vals[1], vals[2]]);
    }
    Ok(rows)
}
