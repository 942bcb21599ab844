use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use super::{AtomSpec, DensityMatrix, DriveConfig};
use crate::error::{Error, Result};

pub type Matrix3 = [[Complex64; 3]; 3];
/// Superoperator acting on row-major `vec(ρ)`.
pub type Liouvillian = SMatrix<Complex64, 9, 9>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_rabi(v: Complex64, name: &str, t: f64) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} envelope is not finite at t = {t}")))
    }
}

/// Rotating-frame Hamiltonian at time `t` (ħ = 1, rad/s).
pub fn build_hamiltonian(atom: &AtomSpec, drive: &DriveConfig, t: f64) -> Result<Matrix3> {
    drive.validate_static()?;
    let (op, om) = drive.rabi(t);
    check_rabi(op, "sigma+", t)?;
    check_rabi(om, "sigma-", t)?;
    Ok(hamiltonian_from_parts(atom, drive, op, om))
}

pub(crate) fn hamiltonian_from_parts(
    atom: &AtomSpec,
    drive: &DriveConfig,
    omega_plus: Complex64,
    omega_minus: Complex64,
) -> Matrix3 {
    let zb = atom.zeeman_rate * drive.b_field;
    let mut h = [[ZERO; 3]; 3];
    h[0][0] = Complex64::new(-zb, 0.0);
    h[1][1] = Complex64::new(zb + drive.raman_detuning, 0.0);
    h[2][2] = Complex64::new(-drive.detuning, 0.0);
    h[2][0] = -0.5 * omega_minus;
    h[2][1] = -0.5 * omega_plus;
    h[0][2] = h[2][0].conj();
    h[1][2] = h[2][1].conj();
    h
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    3 * i + j
}

fn add_jump(l: &mut Liouvillian, c: &Matrix3, rate: f64) {
    if rate == 0.0 {
        return;
    }
    // C†C
    let mut cdc = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                cdc[i][j] += c[k][i].conj() * c[k][j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    l[(idx(i, j), idx(k, m))] += rate * c[i][k] * c[j][m].conj();
                }
                l[(idx(i, j), idx(k, j))] -= 0.5 * rate * cdc[i][k];
                l[(idx(i, j), idx(i, k))] -= 0.5 * rate * cdc[k][j];
            }
        }
    }
}

/// Full Lindblad superoperator for a constant drive evaluated at `t`.
///
/// Jump operators: `√(γ b₋)|−⟩⟨e|`, `√(γ b₊)|+⟩⟨e|` and ground dephasing
/// `√(γ₀/2)(|+⟩⟨+| − |−⟩⟨−|)`, which damps `ρ₊₋` at exactly `γ₀`.
pub fn liouvillian(atom: &AtomSpec, drive: &DriveConfig, t: f64) -> Result<Liouvillian> {
    let h = build_hamiltonian(atom, drive, t)?;
    let mut l = Liouvillian::zeros();
    let mi = Complex64::new(0.0, -1.0);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                l[(idx(i, j), idx(k, j))] += mi * h[i][k];
                l[(idx(i, j), idx(i, k))] -= mi * h[k][j];
            }
        }
    }
    let mut down_minus = [[ZERO; 3]; 3];
    down_minus[0][2] = Complex64::new(1.0, 0.0);
    let mut down_plus = [[ZERO; 3]; 3];
    down_plus[1][2] = Complex64::new(1.0, 0.0);
    let mut dephase = [[ZERO; 3]; 3];
    dephase[0][0] = Complex64::new(-1.0, 0.0);
    dephase[1][1] = Complex64::new(1.0, 0.0);
    add_jump(&mut l, &down_minus, atom.gamma * atom.branch_minus);
    add_jump(&mut l, &down_plus, atom.gamma * atom.branch_plus);
    add_jump(&mut l, &dephase, 0.5 * atom.gamma0);
    Ok(l)
}

pub(crate) fn vectorize(rho: &Matrix3) -> SVector<Complex64, 9> {
    SVector::<Complex64, 9>::from_fn(|k, _| rho[k / 3][k % 3])
}

pub(crate) fn unvectorize(v: &SVector<Complex64, 9>) -> Matrix3 {
    let mut m = [[ZERO; 3]; 3];
    for k in 0..9 {
        m[k / 3][k % 3] = v[k];
    }
    m
}

/// `L(ρ)` as a 3×3 matrix.
pub fn apply_liouvillian(l: &Liouvillian, rho: &DensityMatrix) -> Matrix3 {
    unvectorize(&(l * vectorize(rho.matrix())))
}
