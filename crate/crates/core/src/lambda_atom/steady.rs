use nalgebra::SVector;
use num_complex::Complex64;

use super::hamiltonian::{unvectorize, vectorize};
use super::{liouvillian, AtomSpec, DensityMatrix, DriveConfig, Liouvillian};
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as kernel.
const KERNEL_TOL: f64 = 1e-12;
/// Residual bound on the rate-normalized Liouvillian.
pub const RESIDUAL_TOL: f64 = 1e-10;

fn scale_of(l: &Liouvillian) -> f64 {
    l.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `‖L(ρ)‖₂ / max|L_ij|`: the stationarity residual in units of the
/// fastest rate of the generator.
pub fn liouvillian_residual(atom: &AtomSpec, drive: &DriveConfig, rho: &DensityMatrix) -> Result<f64> {
    let l = liouvillian(atom, drive, 0.0)?;
    let scale = scale_of(&l);
    Ok((l * vectorize(rho.matrix())).norm() / scale)
}

/// Unique stationary state of a constant drive.
pub fn steady_state(atom: &AtomSpec, drive: &DriveConfig) -> Result<DensityMatrix> {
    steady_state_with_residual(atom, drive).map(|(rho, _)| rho)
}

/// Stationary state together with its normalized residual.
pub fn steady_state_with_residual(atom: &AtomSpec, drive: &DriveConfig) -> Result<(DensityMatrix, f64)> {
    atom.validate()?;
    if !drive.is_constant() {
        return Err(Error::InvalidInput(
            "steady state requires a time-independent drive".into(),
        ));
    }
    let l = liouvillian(atom, drive, 0.0)?;
    let scale = scale_of(&l);
    let ln = l / Complex64::new(scale, 0.0);

    let sv = ln.singular_values();
    let smax = sv.max();
    let kernel_dim = sv.iter().filter(|s| **s <= KERNEL_TOL * smax).count();
    if kernel_dim != 1 {
        return Err(Error::Degenerate { kernel_dim });
    }

    // Replace the |−⟩ population equation by the trace condition.
    let mut a = ln;
    for col in 0..9 {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for k in 0..3 {
        a[(0, 4 * k)] = Complex64::new(1.0, 0.0);
    }
    let mut b = SVector::<Complex64, 9>::zeros();
    b[0] = Complex64::new(1.0, 0.0);
    let lu = a.lu();
    let mut x = lu
        .solve(&b)
        .ok_or(Error::Degenerate { kernel_dim: 0 })?;
    // One round of iterative refinement.
    let r = b - a * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let raw = DensityMatrix::from_raw(unvectorize(&x)).hermitized();
    let tr = raw.trace().re;
    let mut m = *raw.matrix();
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v /= tr;
        }
    }
    let rho = DensityMatrix::from_raw(m);
    let residual = (ln * vectorize(rho.matrix())).norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::NumericalFailure {
            step: 0,
            detail: format!("steady-state residual {residual:.3e}"),
        });
    }
    rho.check()
        .map_err(|detail| Error::NumericalFailure { step: 0, detail })?;
    Ok((rho, residual))
}
