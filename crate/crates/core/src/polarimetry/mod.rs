//! Jones-vector bookkeeping between the linear lab frame and the circular
//! atomic frame, and the polarizing-beam-splitter projection onto the two
//! photodiodes.
//!
//! Circular unit vectors are `σ± = (x̂ ∓ iŷ)/√2`, so
//! `E± = (Ex ± iEy)/√2` and, inversely, `Ex = (E₊ + E₋)/√2`,
//! `Ey = −i(E₊ − E₋)/√2`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Default leakage of the control port into the signal port.
pub const DEFAULT_EXTINCTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Linear,
    Circular,
}

/// Transverse field amplitude in either basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesField {
    pub a: Complex64,
    pub b: Complex64,
    pub basis: Basis,
}

impl JonesField {
    pub fn linear(ex: Complex64, ey: Complex64) -> Self {
        Self { a: ex, b: ey, basis: Basis::Linear }
    }

    pub fn circular(e_plus: Complex64, e_minus: Complex64) -> Self {
        Self { a: e_plus, b: e_minus, basis: Basis::Circular }
    }

    /// Linearly polarized field of amplitude `amp` at `angle` from x̂.
    pub fn at_angle(amp: Complex64, angle: f64) -> Self {
        Self::linear(amp * angle.cos(), amp * angle.sin())
    }

    pub fn intensity(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b].iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn to_linear(self) -> Self {
        match self.basis {
            Basis::Linear => self,
            Basis::Circular => {
                let (ex, ey) = circular_to_lin(self.a, self.b);
                Self::linear(ex, ey)
            }
        }
    }

    pub fn to_circular(self) -> Self {
        match self.basis {
            Basis::Circular => self,
            Basis::Linear => {
                let (p, m) = lin_to_circular(self.a, self.b);
                Self::circular(p, m)
            }
        }
    }

    /// `(Ex, Ey)`.
    pub fn xy(&self) -> (Complex64, Complex64) {
        let l = self.to_linear();
        (l.a, l.b)
    }

    /// `(E₊, E₋)`.
    pub fn plus_minus(&self) -> (Complex64, Complex64) {
        let c = self.to_circular();
        (c.a, c.b)
    }
}

pub fn lin_to_circular(ex: Complex64, ey: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    ((ex + i * ey) * FRAC_1_SQRT_2, (ex - i * ey) * FRAC_1_SQRT_2)
}

pub fn circular_to_lin(e_plus: Complex64, e_minus: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    ((e_plus + e_minus) * FRAC_1_SQRT_2, -i * (e_plus - e_minus) * FRAC_1_SQRT_2)
}

/// Polarization rotation `Δθ = (2π/λ)(n₊ − n₋)L/2`.
pub fn rotation_angle(n_plus: f64, n_minus: f64, wavelength: f64, length: f64) -> f64 {
    2.0 * PI / wavelength * (n_plus - n_minus) * length / 2.0
}

/// Photodiode intensities behind the polarizing splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortIntensities {
    pub signal: f64,
    pub control: f64,
}

impl PortIntensities {
    pub fn total(&self) -> f64 {
        self.signal + self.control
    }
}

/// Splits `field` into the component along `detector_axis` (signal port) and
/// the orthogonal one (control port). A fraction `extinction` of the control
/// port leaks into the signal port; the total is conserved.
pub fn pbs_project(field: &JonesField, detector_axis: f64, extinction: f64) -> Result<PortIntensities> {
    if !field.is_finite() {
        return Err(Error::InvalidInput("Jones field is not finite".into()));
    }
    if !(0.0..=1.0).contains(&extinction) {
        return Err(Error::InvalidInput(format!(
            "extinction ratio must lie in [0, 1], got {extinction}"
        )));
    }
    let (ex, ey) = field.xy();
    let (c, s) = (detector_axis.cos(), detector_axis.sin());
    let along = (ex * c + ey * s).norm_sqr();
    let across = (-ex * s + ey * c).norm_sqr();
    Ok(PortIntensities {
        signal: along + extinction * across,
        control: (1.0 - extinction) * across,
    })
}
