//! Dense-matrix routes: Hamiltonian assembly, the exact propagator `e^{-iHt}`,
//! and phase-insensitive distances. These are the brute-force references the
//! Trotterized engine is checked against, so they share no code with it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::StateVector;
use crate::error::{Error, Result};

/// Largest register the dense routines accept (2^10 × 2^10 matrices).
pub const MAX_DENSE_QUBITS: usize = 10;

/// One Pauli term of a Hamiltonian `H = Σ coeff · P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PauliTerm {
    X { qubit: usize, coeff: f64 },
    Z { qubit: usize, coeff: f64 },
    ZZ { i: usize, j: usize, coeff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for term in &terms {
            let (a, b) = match *term {
                PauliTerm::X { qubit, .. } | PauliTerm::Z { qubit, .. } => (qubit, qubit),
                PauliTerm::ZZ { i, j, .. } => {
                    if i == j {
                        return Err(Error::invalid(format!("ZZ term on a single qubit {i}")));
                    }
                    (i, j)
                }
            };
            for q in [a, b] {
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
                }
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Real symmetric matrix of `H` in the computational basis.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits: self.n_qubits,
                max: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        let z = |k: usize, q: usize| if (k >> q) & 1 == 0 { 1.0 } else { -1.0 };
        for term in &self.terms {
            match *term {
                PauliTerm::X { qubit, coeff } => {
                    for k in 0..dim {
                        m[(k ^ (1 << qubit), k)] += coeff;
                    }
                }
                PauliTerm::Z { qubit, coeff } => {
                    for k in 0..dim {
                        m[(k, k)] += coeff * z(k, qubit);
                    }
                }
                PauliTerm::ZZ { i, j, coeff } => {
                    for k in 0..dim {
                        m[(k, k)] += coeff * z(k, i) * z(k, j);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::new(self.dense_matrix()?);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

/// `e^{-iHt}` through the eigendecomposition of the (real symmetric) matrix.
pub fn exact_propagator(h: &Hamiltonian, t: f64) -> Result<DMatrix<Complex64>> {
    let eig = SymmetricEigen::new(h.dense_matrix()?);
    let dim = eig.eigenvalues.len();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
    ));
    Ok(&v * phases * v.transpose())
}

pub fn apply_dense(u: &DMatrix<Complex64>, state: &StateVector) -> Result<StateVector> {
    let dim = state.amplitudes().len();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::invalid(format!(
            "operator is {}x{}, state has {dim} amplitudes",
            u.nrows(),
            u.ncols()
        )));
    }
    let psi = DVector::from_column_slice(state.amplitudes());
    let out = u * psi;
    StateVector::from_amplitudes(out.iter().copied().collect())
}

/// Largest element-wise deviation of `u† u` from the identity.
pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let dim = p.nrows();
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((p[(r, c)] - target).norm());
        }
    }
    worst
}

/// `min_φ ‖u − e^{iφ} v‖_F / √dim`, attained at `φ = arg tr(v† u)`.
pub fn operator_distance(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    assert_eq!(u.shape(), v.shape(), "operator shapes differ");
    let overlap: Complex64 = v.adjoint().component_mul(&u.transpose()).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let diff = u - v * phase;
    diff.norm() / (u.nrows() as f64).sqrt()
}

/// `min_φ ‖ψ − e^{iφ} χ‖` for state vectors.
pub fn state_distance(psi: &StateVector, chi: &StateVector) -> f64 {
    let overlap: Complex64 = chi
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(c, p)| c.conj() * p)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    psi.amplitudes()
        .iter()
        .zip(chi.amplitudes())
        .map(|(p, c)| (p - c * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `1 − |⟨ψ|χ⟩|²`
pub fn infidelity(psi: &StateVector, chi: &StateVector) -> f64 {
    let overlap: Complex64 = psi
        .amplitudes()
        .iter()
        .zip(chi.amplitudes())
        .map(|(p, c)| p.conj() * c)
        .sum();
    1.0 - overlap.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let h = Hamiltonian::new(3, vec![]).unwrap();
        let u = exact_propagator(&h, 1.7).unwrap();
        let id = DMatrix::<Complex64>::identity(8, 8);
        assert!((u - id).norm() < 1e-14);
    }

    #[test]
    fn single_x_term_is_pauli_exponential() {
        // H = -h X  =>  e^{-iHt} = cos(ht) I + i sin(ht) X
        let (hx, t) = (0.8, 1.3);
        let h = Hamiltonian::new(1, vec![PauliTerm::X { qubit: 0, coeff: -hx }]).unwrap();
        let u = exact_propagator(&h, t).unwrap();
        let (c, s) = ((hx * t).cos(), (hx * t).sin());
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(c, 0.0),
            ],
        );
        assert!((u - expected).norm() < 1e-12);
    }

    #[test]
    fn propagator_is_unitary() {
        let h = Hamiltonian::new(
            4,
            vec![
                PauliTerm::X { qubit: 0, coeff: -2.0 },
                PauliTerm::X { qubit: 3, coeff: -0.4 },
                PauliTerm::Z { qubit: 1, coeff: 0.3 },
                PauliTerm::ZZ { i: 0, j: 1, coeff: -1.0 },
                PauliTerm::ZZ { i: 2, j: 3, coeff: -0.7 },
            ],
        )
        .unwrap();
        let u = exact_propagator(&h, 2.5).unwrap();
        assert!(unitarity_deviation(&u) < 1e-10);
    }

    #[test]
    fn dense_guard_and_bad_terms() {
        let h = Hamiltonian::new(11, vec![]).unwrap();
        assert!(matches!(h.dense_matrix(), Err(Error::TooManyQubits { .. })));
        assert!(Hamiltonian::new(2, vec![PauliTerm::ZZ { i: 1, j: 1, coeff: 1.0 }]).is_err());
        assert!(Hamiltonian::new(2, vec![PauliTerm::X { qubit: 2, coeff: 1.0 }]).is_err());
    }

    #[test]
    fn operator_distance_ignores_global_phase() {
        let u = DMatrix::<Complex64>::identity(4, 4);
        let v = &u * Complex64::from_polar(1.0, 0.9);
        assert!(operator_distance(&u, &v) < 1e-15);
        let w = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        assert!(operator_distance(&u, &w) > 0.5);
    }
}
