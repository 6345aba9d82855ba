//! Dense state-vector engine.
//!
//! Qubit `q` is bit `q` of the basis index (little-endian). Printed bitstrings
//! put qubit 0 rightmost, so `|01⟩` is basis index 1.

mod dense;
mod density;
pub(crate) mod kernels;
pub mod gates;

use num_complex::Complex64;
use rand::Rng;

pub use dense::{
    apply_dense, exact_propagator, infidelity, operator_distance, state_distance,
    unitarity_deviation, Hamiltonian, PauliTerm, MAX_DENSE_QUBITS,
};
pub use density::DensityMatrix2x2;
pub(crate) use density::hermitian_eigenvalues;
pub use gates::Mat2;

use crate::error::{Error, Result};

/// Memory guard: 2^24 amplitudes is 256 MiB.
pub const MAX_QUBITS: usize = 24;

const UNITARY_TOL: f64 = 1e-10;

/// Diagonal ZZ rotation `exp(-i θ Z_i Z_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzTerm {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl ZzTerm {
    pub fn new(i: usize, j: usize, theta: f64) -> Self {
        Self { i, j, theta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new_basis_state(n_qubits: usize, basis_index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return Err(Error::invalid(format!(
                "basis index {basis_index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[basis_index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. Not normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    /// `a ⊗ b` with `b` on the low qubits.
    pub fn tensor(high: &StateVector, low: &StateVector) -> Result<Self> {
        let n = high.n_qubits + low.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits: n,
                max: MAX_QUBITS,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for h in &high.amps {
            amps.extend(low.amps.iter().map(|l| h * l));
        }
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability of reading 1 on `qubit`.
    pub fn excited_population(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(k, _)| k & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, qubit: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(qubit)?;
        let deviation = gates::unitarity_deviation(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        self.apply_1q_unchecked(qubit, u);
        Ok(())
    }

    /// Applies an arbitrary 2×2 operator (Kraus operators included).
    pub(crate) fn apply_1q_unchecked(&mut self, qubit: usize, u: &Mat2) {
        let stride = 1usize << qubit;
        let [[u00, u01], [u10, u11]] = *u;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = u00 * x0 + u01 * x1;
                *a1 = u10 * x0 + u11 * x1;
            }
        }
    }

    /// `[[c, −i s], [−i s, c]]`, the form of every x rotation.
    pub(crate) fn apply_rx_like(&mut self, qubit: usize, c: f64, s: f64) {
        kernels::apply_rx(&mut self.amps, qubit, c, s);
    }

    /// A run of x-rotation-form gates `(qubit, c, s)` on distinct qubits.
    pub(crate) fn apply_rx_layer(&mut self, rots: &[(usize, f64, f64)]) {
        kernels::apply_rx_layer(&mut self.amps, rots);
    }

    /// Multiplies the `|0⟩` and `|1⟩` halves of `qubit` by `d0` and `d1`.
    pub(crate) fn apply_1q_diagonal(&mut self, qubit: usize, d0: Complex64, d1: Complex64) {
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            if d0 != Complex64::new(1.0, 0.0) {
                lo.iter_mut().for_each(|a| *a *= d0);
            }
            hi.iter_mut().for_each(|a| *a *= d1);
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let (cm, tm) = (1usize << control, 1usize << target);
        for k in 0..self.amps.len() {
            if k & cm != 0 && k & tm == 0 {
                self.amps.swap(k, k | tm);
            }
        }
        Ok(())
    }

    /// Multiplies each amplitude by `exp(-i Σ θ z_i z_j)` with `z = +1` for
    /// bit 0 and `z = -1` for bit 1.
    pub fn apply_zz_phase(&mut self, terms: &[ZzTerm]) -> Result<()> {
        for t in terms {
            self.check_qubit(t.i)?;
            self.check_qubit(t.j)?;
            if t.i == t.j {
                return Err(Error::invalid(format!(
                    "ZZ term repeats qubit {} within one term",
                    t.i
                )));
            }
        }
        if terms.is_empty() {
            return Ok(());
        }
        let same: Vec<Complex64> = terms
            .iter()
            .map(|t| Complex64::from_polar(1.0, -t.theta))
            .collect();
        for (k, a) in self.amps.iter_mut().enumerate() {
            let mut f = Complex64::new(1.0, 0.0);
            for (t, s) in terms.iter().zip(&same) {
                let parity = ((k >> t.i) ^ (k >> t.j)) & 1;
                f *= if parity == 0 { *s } else { s.conj() };
            }
            *a *= f;
        }
        Ok(())
    }

    /// Exact relabeling: new qubit `q` carries old qubit `order[q]`.
    pub fn permute_qubits(&mut self, order: &[usize]) -> Result<()> {
        check_permutation(order, self.n_qubits)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let mut m = 0usize;
            for (new_q, &old_q) in order.iter().enumerate() {
                m |= ((k >> old_q) & 1) << new_q;
            }
            out[m] = *a;
        }
        self.amps = out;
        Ok(())
    }

    /// Reduced density matrix of one qubit.
    pub fn partial_trace_single(&self, qubit: usize) -> Result<DensityMatrix2x2> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let (mut p0, mut p1) = (0.0, 0.0);
        let mut off = Complex64::new(0.0, 0.0);
        for k in 0..self.amps.len() {
            if k & mask == 0 {
                let (a0, a1) = (self.amps[k], self.amps[k | mask]);
                p0 += a0.norm_sqr();
                p1 += a1.norm_sqr();
                off += a0 * a1.conj();
            }
        }
        let norm = p0 + p1;
        Ok(DensityMatrix2x2::new_unchecked([
            [Complex64::new(p0 / norm, 0.0), off / norm],
            [off.conj() / norm, Complex64::new(p1 / norm, 0.0)],
        ]))
    }

    /// Draws `n_runs` i.i.d. basis indices from `|a_k|²`.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, n_runs: usize, rng: &mut R) -> Result<Vec<u64>> {
        if n_runs == 0 {
            return Err(Error::invalid("n_runs must be at least 1"));
        }
        let sampler = Sampler::new(&self.amps);
        Ok((0..n_runs).map(|_| sampler.draw(rng)).collect())
    }
}

/// Inverse-CDF sampler over `|a_k|²`; tolerates an unnormalized input.
pub(crate) struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub(crate) fn new(amps: &[Complex64]) -> Self {
        let mut acc = 0.0;
        let cdf = amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self { cdf }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u64
    }
}

pub fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid(format!(
            "permutation has {} entries, expected {n}",
            order.len()
        )));
    }
    for &q in order {
        if q >= n || seen[q] {
            return Err(Error::invalid(format!("{order:?} is not a permutation")));
        }
        seen[q] = true;
    }
    Ok(())
}

/// Renders basis index `k` with qubit 0 as the rightmost character.
pub fn format_bitstring(k: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if (k >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`format_bitstring`].
pub fn parse_bitstring(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > 64 {
        return Err(Error::Parse(format!("bad bitstring length in {s:?}")));
    }
    s.chars().try_fold(0u64, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Parse(format!("invalid bitstring character {c:?} in {s:?}"))),
    })
}
