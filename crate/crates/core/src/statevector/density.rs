use num_complex::Complex64;

use crate::error::{Error, Result};

const TOL: f64 = 1e-10;

/// Single-qubit density matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2x2 {
    entries: [[Complex64; 2]; 2],
}

impl DensityMatrix2x2 {
    /// Validates hermiticity, unit trace and positivity to within 1e-10.
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        let rho = Self { entries };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    /// Pure state `α|0⟩ + β|1⟩` (normalized internally).
    pub fn from_pure(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero vector".into()));
        }
        let (a, b) = (alpha / norm, beta / norm);
        Self::new([[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]])
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Eigenvalues in ascending order (the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.entries;
        let herm = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if herm > TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let [lo, _] = self.eigenvalues();
        if lo < -TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lo:.3e}"
            )));
        }
        Ok(())
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix `[[p, q], [q*, r]]`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let p = m[0][0].re;
    let r = m[1][1].re;
    let mean = 0.5 * (p + r);
    let half_gap = (0.25 * (p - r) * (p - r) + m[0][1].norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}
