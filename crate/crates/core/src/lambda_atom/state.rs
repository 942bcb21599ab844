use num_complex::Complex64;
use crate::error::{Error, Result};

/// Hermiticity tolerance (absolute, per entry).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted as numerical noise.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Minus = 0,
    Plus = 1,
    Excited = 2,
}

/// Single-atom density matrix over `(|−⟩, |+⟩, |e⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: [[Complex64; 3]; 3],
}

impl DensityMatrix {
    /// Builds a density matrix and checks Hermiticity, trace and positivity.
    pub fn new(m: [[Complex64; 3]; 3]) -> Result<Self> {
        let rho = Self { m };
        rho.check().map_err(Error::InvalidInput)?;
        Ok(rho)
    }

    pub(crate) fn from_raw(m: [[Complex64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn ground_mixture(p_minus: f64, p_plus: f64) -> Result<Self> {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        m[0][0] = p_minus.into();
        m[1][1] = p_plus.into();
        Self::new(m)
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalized first.
    pub fn pure(psi: [Complex64; 3]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("state vector must be nonzero".into()));
        }
        let v = psi.map(|c| c / norm);
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = v[i] * v[j].conj();
            }
        }
        Ok(Self::from_raw(m).hermitized())
    }

    pub fn level(level: Level) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        m[level as usize][level as usize] = Complex64::new(1.0, 0.0);
        Self { m }
    }

    pub fn matrix(&self) -> &[[Complex64; 3]; 3] {
        &self.m
    }

    #[inline]
    pub fn get(&self, row: Level, col: Level) -> Complex64 {
        self.m[row as usize][col as usize]
    }

    pub fn population(&self, level: Level) -> f64 {
        self.get(level, level).re
    }

    /// `ρ₊₋ = ⟨+|ρ|−⟩`.
    pub fn ground_coherence(&self) -> Complex64 {
        self.get(Level::Plus, Level::Minus)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix by its Hermitian part.
    pub fn hermitized(&self) -> Self {
        let mut m = self.m;
        for i in 0..3 {
            m[i][i] = Complex64::new(self.m[i][i].re, 0.0);
            for j in (i + 1)..3 {
                let avg = 0.5 * (self.m[i][j] + self.m[j][i].conj());
                m[i][j] = avg;
                m[j][i] = avg.conj();
            }
        }
        Self { m }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let h = self.hermitized().m;
        let m = nalgebra::Matrix3::from_fn(|i, j| h[i][j]);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// True when every eigenvalue is at least `-tol`, decided by a
    /// Cholesky factorization of `ρ + tol·I`.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let h = self.hermitized().m;
        let mut l = [[Complex64::new(0.0, 0.0); 3]; 3];
        for j in 0..3 {
            let mut d = h[j][j].re + tol;
            for k in 0..j {
                d -= l[j][k].norm_sqr();
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j][j] = Complex64::new(d, 0.0);
            for i in (j + 1)..3 {
                let mut v = h[i][j];
                for k in 0..j {
                    v -= l[i][k] * l[j][k].conj();
                }
                l[i][j] = v / d;
            }
        }
        true
    }

    /// Checks the three state invariants, reporting the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        for row in &self.m {
            for v in row {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err("non-finite density-matrix entry".into());
                }
            }
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(format!("Hermiticity error {herm:.3e}"));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(format!("trace {:.12} deviates from 1", tr.re));
        }
        if !self.is_positive_within(POSITIVITY_TOL) {
            let min = self.min_eigenvalue();
            return Err(format!("negative eigenvalue {min:.3e}"));
        }
        Ok(())
    }

    /// Largest entrywise difference from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// Relabels `|+⟩ ↔ |−⟩`.
    pub fn swapped_grounds(&self) -> Self {
        let p = [1usize, 0, 2];
        let mut m = self.m;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[p[i]][p[j]];
            }
        }
        Self { m }
    }
}
