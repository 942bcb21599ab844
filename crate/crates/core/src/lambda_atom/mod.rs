//! Three-level Λ atom: two Zeeman ground sublevels `|−⟩`, `|+⟩` sharing one
//! excited level `|e⟩`, driven by the σ⁺/σ⁻ circular components of a
//! classical field.
//!
//! Conventions used throughout the crate:
//!
//! * basis order is `(|−⟩, |+⟩, |e⟩)`;
//! * the σ± component couples `|±⟩ ↔ |e⟩` with matrix element `−Ω±/2`
//!   (`H[e][±] = −Ω±/2`);
//! * the frame rotates at the laser frequency, so the excited diagonal is
//!   `−δ`; the ground diagonals are `∓ μ_B B/ħ` on `|∓⟩`, and the σ⁺
//!   component may carry an extra Raman offset on `|+⟩`;
//! * ħ = 1, all rates in rad/s.

mod dynamics;
mod hamiltonian;
mod state;
mod steady;
mod susceptibility;

pub use dynamics::{
    evolve, evolve_recorded, max_stable_step, rhs, AtomState, Rates, Trajectory, STEPS_PER_RATE,
};
pub use hamiltonian::{apply_liouvillian, build_hamiltonian, liouvillian, Liouvillian, Matrix3};
pub use state::{DensityMatrix, Level};
pub use steady::{liouvillian_residual, steady_state, steady_state_with_residual};
pub use susceptibility::{coherence_susceptibility, coherence_susceptibility_component};

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::units::BOHR_RATE;
use crate::vapor::ConstantsTable;

/// Circular polarization component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Circular {
    Plus,
    Minus,
}

impl Circular {
    pub fn ground(self) -> Level {
        match self {
            Circular::Plus => Level::Plus,
            Circular::Minus => Level::Minus,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Circular::Plus => Circular::Minus,
            Circular::Minus => Circular::Plus,
        }
    }
}

/// Constants of the Λ system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    /// Excited-state radiative decay rate (rad/s).
    pub gamma: f64,
    /// Fraction of decays into `|+⟩`.
    pub branch_plus: f64,
    /// Fraction of decays into `|−⟩`.
    pub branch_minus: f64,
    /// Ground (Zeeman) coherence decay rate (rad/s).
    pub gamma0: f64,
    /// Ground-level shift per tesla (rad/s/T).
    pub zeeman_rate: f64,
}

impl Default for AtomSpec {
    fn default() -> Self {
        let d = &ConstantsTable::builtin().defaults;
        Self {
            gamma: d.gamma(),
            branch_plus: d.branch_plus,
            branch_minus: 1.0 - d.branch_plus,
            gamma0: d.gamma0(),
            zeeman_rate: BOHR_RATE,
        }
    }
}

impl AtomSpec {
    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.branch_plus >= 0.0 && self.branch_minus >= 0.0)
            || (self.branch_plus + self.branch_minus - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidInput(format!(
                "branching fractions must be non-negative and sum to 1, got {} + {}",
                self.branch_plus, self.branch_minus
            )));
        }
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma0 must be non-negative, got {}",
                self.gamma0
            )));
        }
        if !(self.zeeman_rate > 0.0 && self.zeeman_rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "zeeman rate must be positive, got {}",
                self.zeeman_rate
            )));
        }
        Ok(())
    }
}

/// Rabi-frequency envelope of one field component (rad/s).
#[derive(Clone)]
pub enum Envelope {
    Constant(Complex64),
    Function(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Envelope {
    pub fn zero() -> Self {
        Envelope::Constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(value: Complex64) -> Self {
        Envelope::Constant(value)
    }

    pub fn function(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Envelope::Function(Arc::new(f))
    }

    #[inline]
    pub fn at(&self, t: f64) -> Complex64 {
        match self {
            Envelope::Constant(v) => *v,
            Envelope::Function(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Envelope::Constant(_))
    }
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Envelope::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Classical drive seen by one atom.
#[derive(Debug, Clone)]
pub struct DriveConfig {
    pub omega_plus: Envelope,
    pub omega_minus: Envelope,
    /// Common laser detuning δ = ω − ω₀ (rad/s).
    pub detuning: f64,
    /// Additional detuning of the σ⁺ component relative to σ⁻ (rad/s).
    /// Zero whenever both components come from one laser.
    pub raman_detuning: f64,
    /// Axial magnetic field (T).
    pub b_field: f64,
}

impl DriveConfig {
    pub fn constant(omega_plus: Complex64, omega_minus: Complex64, detuning: f64, b_field: f64) -> Self {
        Self {
            omega_plus: Envelope::Constant(omega_plus),
            omega_minus: Envelope::Constant(omega_minus),
            detuning,
            raman_detuning: 0.0,
            b_field,
        }
    }

    pub fn with_raman_detuning(mut self, raman: f64) -> Self {
        self.raman_detuning = raman;
        self
    }

    /// The same drive with σ⁺ ↔ σ⁻ exchanged and the field reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            omega_plus: self.omega_minus.clone(),
            omega_minus: self.omega_plus.clone(),
            detuning: self.detuning,
            raman_detuning: self.raman_detuning,
            b_field: -self.b_field,
        }
    }

    #[inline]
    pub fn rabi(&self, t: f64) -> (Complex64, Complex64) {
        (self.omega_plus.at(t), self.omega_minus.at(t))
    }

    pub fn rabi_component(&self, pol: Circular, t: f64) -> Complex64 {
        match pol {
            Circular::Plus => self.omega_plus.at(t),
            Circular::Minus => self.omega_minus.at(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.omega_plus.is_constant() && self.omega_minus.is_constant()
    }

    pub(crate) fn validate_static(&self) -> Result<()> {
        if !self.detuning.is_finite() || !self.raman_detuning.is_finite() {
            return Err(Error::InvalidInput("detuning must be finite".into()));
        }
        if !self.b_field.is_finite() {
            return Err(Error::InvalidInput("magnetic field must be finite".into()));
        }
        Ok(())
    }
}
