use num_complex::Complex64;
use std::ops::{Add, Mul};

use super::{AtomSpec, DensityMatrix, DriveConfig};
use crate::error::{Error, Result};

/// Steps per fastest rate required by the fixed-step integrator.
pub const STEPS_PER_RATE: f64 = 50.0;

/// Hermitian density matrix packed into nine reals:
/// `[ρ−−, ρ++, ρee, Re ρ−+, Im ρ−+, Re ρ−e, Im ρ−e, Re ρ+e, Im ρ+e]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AtomState(pub [f64; 9]);

impl AtomState {
    #[inline]
    pub fn c01(&self) -> Complex64 {
        Complex64::new(self.0[3], self.0[4])
    }

    #[inline]
    pub fn c02(&self) -> Complex64 {
        Complex64::new(self.0[5], self.0[6])
    }

    #[inline]
    pub fn c12(&self) -> Complex64 {
        Complex64::new(self.0[7], self.0[8])
    }

    /// Optical coherence `ρ_e±` driving the σ± field.
    #[inline]
    pub fn rho_e_plus(&self) -> Complex64 {
        Complex64::new(self.0[7], -self.0[8])
    }

    #[inline]
    pub fn rho_e_minus(&self) -> Complex64 {
        Complex64::new(self.0[5], -self.0[6])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        let z = Complex64::new(0.0, 0.0);
        let mut m = [[z; 3]; 3];
        m[0][0] = self.0[0].into();
        m[1][1] = self.0[1].into();
        m[2][2] = self.0[2].into();
        m[0][1] = self.c01();
        m[0][2] = self.c02();
        m[1][2] = self.c12();
        m[1][0] = m[0][1].conj();
        m[2][0] = m[0][2].conj();
        m[2][1] = m[1][2].conj();
        DensityMatrix::from_raw(m)
    }

    pub fn from_density_matrix(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self([
            m[0][0].re, m[1][1].re, m[2][2].re, m[0][1].re, m[0][1].im, m[0][2].re, m[0][2].im,
            m[1][2].re, m[1][2].im,
        ])
    }
}

impl Add for AtomState {
    type Output = AtomState;

    #[inline]
    fn add(self, rhs: AtomState) -> AtomState {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        AtomState(out)
    }
}

impl Mul<AtomState> for f64 {
    type Output = AtomState;

    #[inline]
    fn mul(self, rhs: AtomState) -> AtomState {
        AtomState(rhs.0.map(|v| self * v))
    }
}

/// Time-independent part of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// Rotating-frame energies of `|−⟩`, `|+⟩`, `|e⟩`.
    pub energy: [f64; 3],
    pub gamma: f64,
    pub decay_to_minus: f64,
    pub decay_to_plus: f64,
    pub gamma0: f64,
    /// Optical coherence damping, `γ/2 + γ₀/4`.
    pub optical: f64,
}

impl Rates {
    pub fn new(atom: &AtomSpec, drive: &DriveConfig) -> Self {
        Self::from_parts(atom, drive.detuning, drive.raman_detuning, drive.b_field)
    }

    pub fn from_parts(atom: &AtomSpec, detuning: f64, raman_detuning: f64, b_field: f64) -> Self {
        let zb = atom.zeeman_rate * b_field;
        Self {
            energy: [-zb, zb + raman_detuning, -detuning],
            gamma: atom.gamma,
            decay_to_minus: atom.gamma * atom.branch_minus,
            decay_to_plus: atom.gamma * atom.branch_plus,
            gamma0: atom.gamma0,
            optical: 0.5 * atom.gamma + 0.25 * atom.gamma0,
        }
    }

    /// Fastest static rate, for the step-size bound.
    pub fn fastest(&self, atom: &AtomSpec, b_field: f64) -> f64 {
        let detuning = self.energy[2].abs();
        let raman = (self.energy[1] + self.energy[0]).abs();
        atom.gamma
            .max(detuning)
            .max(raman)
            .max((atom.zeeman_rate * b_field).abs())
    }
}

/// Lindblad right-hand side for Rabi frequencies `omega_plus`, `omega_minus`.
#[inline]
pub fn rhs(rates: &Rates, s: &AtomState, omega_plus: Complex64, omega_minus: Complex64) -> AtomState {
    let i = Complex64::new(0.0, 1.0);
    let [h0, h1, h2] = rates.energy;
    // H[e][−], H[e][+]
    let a0 = -0.5 * omega_minus;
    let a1 = -0.5 * omega_plus;
    let (p0, p1, p2) = (s.0[0], s.0[1], s.0[2]);
    let c01 = s.c01();
    let c02 = s.c02();
    let c12 = s.c12();

    let pump0 = (a0 * c02).im;
    let pump1 = (a1 * c12).im;
    let dp0 = -2.0 * pump0 + rates.decay_to_minus * p2;
    let dp1 = -2.0 * pump1 + rates.decay_to_plus * p2;
    let dp2 = 2.0 * (pump0 + pump1) - rates.gamma * p2;

    let dc01 = -i * ((h0 - h1) * c01 + a0.conj() * c12.conj() - c02 * a1) - rates.gamma0 * c01;
    let dc02 = -i * ((h0 - h2) * c02 + a0.conj() * (p2 - p0) - c01 * a1.conj()) - rates.optical * c02;
    let dc12 =
        -i * ((h1 - h2) * c12 + a1.conj() * (p2 - p1) - c01.conj() * a0.conj()) - rates.optical * c12;

    AtomState([dp0, dp1, dp2, dc01.re, dc01.im, dc02.re, dc02.im, dc12.re, dc12.im])
}

/// Classical fourth-order Runge–Kutta step with a precomputed first stage.
///
/// `fields[k]` holds `(Ω⁺, Ω⁻)` at `t`, `t + h/2` and `t + h`.
#[inline]
pub(crate) fn rk4_step(
    rates: &Rates,
    s: &AtomState,
    k1: &AtomState,
    fields: &[(Complex64, Complex64); 3],
    h: f64,
) -> AtomState {
    let (pm, mm) = fields[1];
    let (pe, me) = fields[2];
    let k2 = rhs(rates, &(*s + (0.5 * h) * *k1), pm, mm);
    let k3 = rhs(rates, &(*s + (0.5 * h) * k2), pm, mm);
    let k4 = rhs(rates, &(*s + h * k3), pe, me);
    let mut out = s.0;
    let w = h / 6.0;
    for n in 0..9 {
        out[n] += w * (k1.0[n] + 2.0 * k2.0[n] + 2.0 * k3.0[n] + k4.0[n]);
    }
    AtomState(out)
}

/// Largest admissible step for the given rates and peak Rabi frequency.
pub fn max_stable_step(atom: &AtomSpec, rates: &Rates, b_field: f64, max_rabi: f64) -> f64 {
    1.0 / (STEPS_PER_RATE * rates.fastest(atom, b_field).max(max_rabi))
}

/// Sampled solution of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

/// Integrates the master equation from `rho0` over `t_span` with a fixed
/// step no larger than `dt`, recording every step.
pub fn evolve(
    rho0: &DensityMatrix,
    atom: &AtomSpec,
    drive: &DriveConfig,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory> {
    evolve_recorded(rho0, atom, drive, t_span, dt, 1)
}

/// As [`evolve`], recording every `record_every`-th step (the final state
/// is always recorded).
pub fn evolve_recorded(
    rho0: &DensityMatrix,
    atom: &AtomSpec,
    drive: &DriveConfig,
    t_span: (f64, f64),
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    atom.validate()?;
    drive.validate_static()?;
    rho0.check().map_err(Error::InvalidInput)?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::Configuration(format!("invalid time span ({t0}, {t1})")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Configuration(format!("dt must be positive, got {dt}")));
    }
    let record_every = record_every.max(1);
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };

    // Envelope pass: finiteness and peak Rabi frequency.
    let mut max_rabi = 0.0f64;
    for k in 0..=(2 * steps) {
        let t = t0 + 0.5 * h * k as f64;
        let (p, m) = drive.rabi(t);
        for v in [p, m] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidInput(format!("envelope is not finite at t = {t}")));
            }
            max_rabi = max_rabi.max(v.norm());
        }
    }
    let rates = Rates::new(atom, drive);
    let bound = max_stable_step(atom, &rates, drive.b_field, max_rabi);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "dt = {dt:.3e} s exceeds the stability bound {bound:.3e} s"
        )));
    }

    let mut times = Vec::with_capacity(steps / record_every + 2);
    let mut states = Vec::with_capacity(steps / record_every + 2);
    times.push(t0);
    states.push(*rho0);
    let mut s = AtomState::from_density_matrix(rho0);
    for n in 0..steps {
        let t = t0 + h * n as f64;
        let f0 = drive.rabi(t);
        let fields = [f0, drive.rabi(t + 0.5 * h), drive.rabi(t + h)];
        let k1 = rhs(&rates, &s, f0.0, f0.1);
        s = rk4_step(&rates, &s, &k1, &fields, h);
        if (n + 1) % record_every == 0 || n + 1 == steps {
            let rho = s.to_density_matrix();
            rho.check().map_err(|detail| Error::NumericalFailure { step: n + 1, detail })?;
            times.push(t0 + h * (n + 1) as f64);
            states.push(rho);
        }
    }
    Ok(Trajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::super::{liouvillian, Envelope, Level};
    use super::*;
    use crate::lambda_atom::hamiltonian::{unvectorize, vectorize};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(v: &[f64]) -> DensityMatrix {
        let psi1 = [c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5])];
        let psi2 = [c(v[6], v[7]), c(v[8], v[9]), c(v[10], v[11])];
        let a = DensityMatrix::pure(psi1).unwrap();
        let b = DensityMatrix::pure(psi2).unwrap();
        let mut m = *a.matrix();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = 0.3 * m[i][j] + 0.7 * b.matrix()[i][j];
            }
        }
        DensityMatrix::new(m).unwrap()
    }

    proptest! {
        #[test]
        fn packed_rhs_matches_superoperator(
            v in prop::collection::vec(0.1f64..1.0, 12),
            op in (-3.0f64..3.0, -3.0f64..3.0),
            om in (-3.0f64..3.0, -3.0f64..3.0),
            det in -2.0f64..2.0,
            raman in -1.0f64..1.0,
            b in -1e-4f64..1e-4,
            bp in 0.0f64..1.0,
        ) {
            let atom = AtomSpec {
                gamma: 1.0,
                branch_plus: bp,
                branch_minus: 1.0 - bp,
                gamma0: 0.05,
                zeeman_rate: 1e4,
            };
            let drive = DriveConfig::constant(c(op.0, op.1), c(om.0, om.1), det, b)
                .with_raman_detuning(raman);
            let rho = random_state(&v);
            let l = liouvillian(&atom, &drive, 0.0).unwrap();
            let reference = unvectorize(&(l * vectorize(rho.matrix())));
            let rates = Rates::new(&atom, &drive);
            let packed = rhs(&rates, &AtomState::from_density_matrix(&rho), c(op.0, op.1), c(om.0, om.1));
            let ours = packed.to_density_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((ours.matrix()[i][j] - reference[i][j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rabi_flopping_period() {
        let atom = AtomSpec {
            gamma: 1.0,
            branch_plus: 0.5,
            branch_minus: 0.5,
            gamma0: 0.0,
            zeeman_rate: 1.0,
        };
        // γ enters only the step bound here; set it tiny via a separate atom.
        let atom = AtomSpec { gamma: 1e-12, ..atom };
        let omega = 2.0 * PI; // period 1
        let drive = DriveConfig::constant(c(omega, 0.0), c(0.0, 0.0), 0.0, 0.0);
        let rho0 = DensityMatrix::level(Level::Plus);
        let dt = 1.0 / (50.0 * omega);
        let traj = evolve(&rho0, &atom, &drive, (0.0, 3.2), dt).unwrap();
        // Locate successive maxima of the excited population by parabolic
        // refinement and compare their spacing with 2π/Ω.
        let pe: Vec<f64> = traj.states.iter().map(|r| r.population(Level::Excited)).collect();
        let mut peaks = Vec::new();
        for k in 1..pe.len() - 1 {
            if pe[k] > pe[k - 1] && pe[k] >= pe[k + 1] {
                let (a, b, cc) = (pe[k - 1], pe[k], pe[k + 1]);
                let shift = 0.5 * (a - cc) / (a - 2.0 * b + cc);
                let h = traj.times[1] - traj.times[0];
                peaks.push(traj.times[k] + shift * h);
            }
        }
        assert!(peaks.len() >= 3, "{peaks:?}");
        let period = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
        assert!((period - 1.0).abs() < 1e-3, "period {period}");
        // Full transfer at the peak.
        assert!((pe.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ground_coherence_pure_decay() {
        let atom = AtomSpec::default().with_gamma0(2.0 * PI * 500.0);
        let drive = DriveConfig::constant(c(0.0, 0.0), c(0.0, 0.0), 0.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho0 = DensityMatrix::pure([c(s, 0.0), c(0.0, s), c(0.0, 0.0)]).unwrap();
        let dt = 1.0 / (50.0 * atom.gamma);
        let t_end = 2e-4;
        let traj = evolve_recorded(&rho0, &atom, &drive, (0.0, t_end), dt, 1000).unwrap();
        let c0 = rho0.ground_coherence().norm();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let expected = c0 * (-atom.gamma0 * t).exp();
            let got = rho.ground_coherence().norm();
            assert!(((got - expected) / expected).abs() < 5e-3, "t={t}: {got} vs {expected}");
        }
    }

    #[test]
    fn step_bound_is_enforced() {
        let atom = AtomSpec::default();
        let drive = DriveConfig::constant(c(0.0, 0.0), c(0.0, 0.0), 0.0, 0.0);
        let rho0 = DensityMatrix::level(Level::Plus);
        let dt = 2.0 / (50.0 * atom.gamma);
        assert!(matches!(
            evolve(&rho0, &atom, &drive, (0.0, 1e-6), dt),
            Err(Error::Configuration(_))
        ));
        let strong = DriveConfig::constant(c(10.0 * atom.gamma, 0.0), c(0.0, 0.0), 0.0, 0.0);
        let dt = 1.0 / (50.0 * atom.gamma);
        assert!(evolve(&rho0, &atom, &strong, (0.0, 1e-8), dt).is_err());
        assert!(evolve(&rho0, &atom, &drive, (0.0, 1e-8), -1.0).is_err());
    }

    #[test]
    fn non_finite_envelope_is_invalid_input() {
        let atom = AtomSpec::default();
        let mut drive = DriveConfig::constant(c(0.0, 0.0), c(0.0, 0.0), 0.0, 0.0);
        drive.omega_minus = Envelope::function(|t| if t > 5e-9 { c(f64::INFINITY, 0.0) } else { c(0.0, 0.0) });
        let rho0 = DensityMatrix::level(Level::Plus);
        let dt = 1.0 / (50.0 * atom.gamma);
        assert!(matches!(
            evolve(&rho0, &atom, &drive, (0.0, 1e-8), dt),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn trajectories_stay_physical() {
        let atom = AtomSpec::default();
        let g = atom.gamma;
        let drive = DriveConfig::constant(c(0.7 * g, 0.1 * g), c(0.4 * g, 0.0), 0.3 * g, 2e-7);
        let rho0 = DensityMatrix::ground_mixture(0.3, 0.7).unwrap();
        let dt = 1.0 / (50.0 * g);
        let traj = evolve(&rho0, &atom, &drive, (0.0, 2e-6), dt).unwrap();
        for rho in &traj.states {
            rho.check().unwrap();
        }
        // Deterministic.
        let again = evolve(&rho0, &atom, &drive, (0.0, 2e-6), dt).unwrap();
        assert_eq!(traj, again);
    }

    #[test]
    fn mirror_symmetry() {
        let atom = AtomSpec::default();
        let g = atom.gamma;
        let drive = DriveConfig::constant(c(0.8 * g, 0.0), c(0.3 * g, 0.2 * g), 0.2 * g, 3e-7);
        let rho0 = DensityMatrix::ground_mixture(0.4, 0.6).unwrap();
        let dt = 1.0 / (50.0 * g);
        let a = evolve(&rho0, &atom, &drive, (0.0, 1e-6), dt).unwrap();
        let b = evolve(&rho0.swapped_grounds(), &atom, &drive.mirrored(), (0.0, 1e-6), dt).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            let y = y.swapped_grounds();
            assert!(x.max_abs_diff(&y) < 1e-9);
        }
    }

    fn max_entry_diff(a: &Trajectory, b: &Trajectory, stride: usize) -> f64 {
        a.states
            .iter()
            .enumerate()
            .map(|(k, x)| x.max_abs_diff(&b.states[k * stride]))
            .fold(0.0, f64::max)
    }

    fn smooth_ramp(t: f64, start: f64, rise: f64) -> f64 {
        let x = ((t - start) / rise).clamp(0.0, 1.0);
        0.5 * (1.0 - (PI * x).cos())
    }

    #[test]
    fn switched_storage_converges_under_step_halving() {
        let atom = AtomSpec::default();
        let g = atom.gamma;
        let rise = 1e-6;
        let (off, on) = (2e-6, 132e-6);
        let control = move |t: f64| {
            let level = 1.0 - smooth_ramp(t, off, rise) + smooth_ramp(t, on, rise);
            c(0.3 * g * std::f64::consts::FRAC_1_SQRT_2 * level, 0.0)
        };
        let mut drive = DriveConfig::constant(c(0.0, 0.0), c(0.0, 0.0), 0.0, 2e-7);
        drive.omega_plus = Envelope::function(control);
        drive.omega_minus = Envelope::function(control);
        let rho0 = DensityMatrix::ground_mixture(0.5, 0.5).unwrap();
        let bound = max_stable_step(&atom, &Rates::new(&atom, &drive), drive.b_field, 0.3 * g);
        let span = (0.0, 140e-6);
        let dt = span.1 / (span.1 / bound).ceil();
        let coarse = evolve_recorded(&rho0, &atom, &drive, span, dt, 1000).unwrap();
        let fine = evolve_recorded(&rho0, &atom, &drive, span, 0.5 * dt, 2000).unwrap();
        assert_eq!(coarse.len(), fine.len());
        let diff = max_entry_diff(&coarse, &fine, 1);
        assert!(diff <= 1e-6, "step-halving difference {diff:.3e}");
    }

    #[test]
    fn fourth_order_error_ratio() {
        let atom = AtomSpec::default();
        let g = atom.gamma;
        let pulse = move |t: f64| {
            let x = (t - 0.5e-6) / 0.15e-6;
            c(1.5 * g * (-x * x).exp(), 0.2 * g * (-x * x).exp())
        };
        let mut drive = DriveConfig::constant(c(0.0, 0.0), c(0.6 * g, 0.0), 0.4 * g, 1e-7);
        drive.omega_plus = Envelope::function(pulse);
        let rho0 = DensityMatrix::ground_mixture(0.3, 0.7).unwrap();
        let span = (0.0, 1e-6);
        let dt = span.1 / (span.1 * 50.0 * 1.6 * g).ceil();
        let runs: Vec<Trajectory> = [1usize, 2, 4]
            .iter()
            .map(|k| evolve_recorded(&rho0, &atom, &drive, span, dt / *k as f64, 8 * k).unwrap())
            .collect();
        let e1 = max_entry_diff(&runs[0], &runs[1], 1);
        let e2 = max_entry_diff(&runs[1], &runs[2], 1);
        let ratio = e1 / e2;
        assert!(e2 > 1e-13, "errors at round-off level: {e2:.3e}");
        assert!((ratio - 16.0).abs() <= 4.0, "error ratio {ratio:.2} ({e1:.3e} / {e2:.3e})");
    }
}
