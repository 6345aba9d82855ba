//! Observables and figures of merit computed from sampled bitstrings,
//! final states and reduced density matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::device::KHZ_US;
use crate::error::{Error, Result};
use crate::statevector::{hermitian_eigenvalues, DensityMatrix2x2, StateVector};

/// A time series of one observable with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub label: String,
    pub t_phys_us: Vec<f64>,
    pub t_mapped: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(
        label: impl Into<String>,
        t_phys_us: Vec<f64>,
        t_mapped: Vec<f64>,
        values: Vec<f64>,
        stderr: Vec<f64>,
    ) -> Result<Self> {
        let n = t_phys_us.len();
        if t_mapped.len() != n || values.len() != n || stderr.len() != n {
            return Err(Error::invalid(format!(
                "series lengths differ: t_phys {n}, t_mapped {}, values {}, stderr {}",
                t_mapped.len(),
                values.len(),
                stderr.len()
            )));
        }
        if let Some(se) = stderr.iter().find(|s| !(**s >= 0.0)) {
            return Err(Error::invalid(format!("stderr must be nonnegative, got {se}")));
        }
        Ok(Self {
            label: label.into(),
            t_phys_us,
            t_mapped,
            values,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean_value(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// Whether the excitation count is divided by the number of spins.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcitationScale {
    /// Fraction of excited spins, in [0, 1].
    #[default]
    PerSpin,
    /// Number of excited spins.
    RawSum,
}

impl ExcitationScale {
    fn divisor(self, n_qubits: usize) -> f64 {
        match self {
            ExcitationScale::PerSpin => n_qubits as f64,
            ExcitationScale::RawSum => 1.0,
        }
    }
}

fn check_sample(bitstrings: &[u64], n_qubits: usize) -> Result<()> {
    if bitstrings.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if n_qubits == 0 || n_qubits > 64 {
        return Err(Error::invalid(format!("n_qubits must be in 1..=64, got {n_qubits}")));
    }
    if n_qubits < 64 {
        if let Some(b) = bitstrings.iter().find(|&&b| b >> n_qubits != 0) {
            return Err(Error::invalid(format!("bitstring {b:#b} has bits beyond {n_qubits} qubits")));
        }
    }
    Ok(())
}

/// Sample mean and its standard error, sqrt(Σ(x − x̄)² / (N(N − 1))).
/// A single sample has zero standard error.
pub fn mean_and_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean, (ss / (n * (n - 1.0))).sqrt()))
}

/// Mean number of excited spins per run and its standard error.
pub fn mean_excitation(bitstrings: &[u64], n_qubits: usize, scale: ExcitationScale) -> Result<(f64, f64)> {
    check_sample(bitstrings, n_qubits)?;
    let div = scale.divisor(n_qubits);
    let xs: Vec<f64> = bitstrings.iter().map(|b| b.count_ones() as f64 / div).collect();
    mean_and_stderr(&xs)
}

/// Exact expectation of the excitation number in a pure state.
pub fn mean_excitation_exact(state: &StateVector, scale: ExcitationScale) -> f64 {
    let n = state.n_qubits();
    (0..n).map(|q| state.excited_population(q)).sum::<f64>() / scale.divisor(n)
}

/// Per-qubit magnetization m_j = 2⟨n_j⟩ − 1.
pub fn magnetization_pattern(bitstrings: &[u64], n_qubits: usize) -> Result<Vec<f64>> {
    check_sample(bitstrings, n_qubits)?;
    let mut ones = vec![0usize; n_qubits];
    for &b in bitstrings {
        let mut bits = b;
        while bits != 0 {
            ones[bits.trailing_zeros() as usize] += 1;
            bits &= bits - 1;
        }
    }
    let n = bitstrings.len() as f64;
    Ok(ones.into_iter().map(|c| 2.0 * c as f64 / n - 1.0).collect())
}

/// Standard error of each m_j from the same sample.
pub fn magnetization_stderr(bitstrings: &[u64], n_qubits: usize) -> Result<Vec<f64>> {
    check_sample(bitstrings, n_qubits)?;
    (0..n_qubits)
        .map(|q| {
            let xs: Vec<f64> = bitstrings.iter().map(|b| if b >> q & 1 == 1 { 1.0 } else { -1.0 }).collect();
            mean_and_stderr(&xs).map(|(_, se)| se)
        })
        .collect()
}

pub fn magnetization_exact(state: &StateVector) -> Vec<f64> {
    (0..state.n_qubits()).map(|q| 2.0 * state.excited_population(q) - 1.0).collect()
}

/// Mean magnetization of `up` minus mean magnetization of `down`.
pub fn half_difference(m: &[f64], up: &[usize], down: &[usize]) -> Result<f64> {
    if up.is_empty() || down.is_empty() {
        return Err(Error::invalid("up and down sets must be nonempty"));
    }
    if let Some(q) = up.iter().chain(down).find(|&&q| q >= m.len()) {
        return Err(Error::invalid(format!("spin {q} out of range for {} magnetizations", m.len())));
    }
    if let Some(q) = up.iter().find(|q| down.contains(q)) {
        return Err(Error::invalid(format!("spin {q} is in both up and down sets")));
    }
    let avg = |set: &[usize]| set.iter().map(|&q| m[q]).sum::<f64>() / set.len() as f64;
    Ok(avg(up) - avg(down))
}

/// Splits an initial basis pattern into (excited, ground) spin sets.
pub fn pattern_sets(pattern: u64, n_qubits: usize) -> (Vec<usize>, Vec<usize>) {
    (0..n_qubits).partition(|&q| pattern >> q & 1 == 1)
}

fn check_same_grid(a: &ObservableSeries, b: &ObservableSeries) -> Result<()> {
    let same = a.len() == b.len()
        && a
            .t_phys_us
            .iter()
            .zip(&b.t_phys_us)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "time grids of `{}` and `{}` do not match",
            a.label, b.label
        )))
    }
}

/// Pointwise |a − b| on a shared time grid.
pub fn l1_metric(a: &ObservableSeries, b: &ObservableSeries) -> Result<Vec<f64>> {
    check_same_grid(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect())
}

/// Discrete Fourier components of the series normalized by its maximum,
/// X_k = Σ_m ñ_m exp(−2πi mk/n).
pub fn fourier_components(series: &ObservableSeries) -> Result<Vec<Complex64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid("Fourier spectrum needs at least 2 points"));
    }
    let t = &series.t_phys_us;
    let step = t[1] - t[0];
    let tol = 1e-9 * t.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if !(step > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(Error::invalid("Fourier spectrum needs a uniform increasing time grid"));
    }
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == 0.0 || !max.is_finite() {
        return Err(Error::invalid(format!("cannot normalize series with maximum {max}")));
    }
    Ok((0..n)
        .map(|k| {
            series
                .values
                .iter()
                .enumerate()
                .map(|(m, v)| Complex64::from_polar(v / max, -2.0 * PI * (m * k % n) as f64 / n as f64))
                .sum()
        })
        .collect())
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::invalid(format!("{name} has a negative or NaN entry {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!("support sizes differ: {} vs {}", p.len(), q.len())));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")
}

/// ½ Σ |p − q|.
pub fn trace_distance_classical(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// −ln Σ √(p q); `f64::INFINITY` when the supports are disjoint.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    if bc == 0.0 {
        return Ok(f64::INFINITY);
    }
    // Equal distributions can round to a coefficient slightly above 1.
    Ok((-bc.min(1.0).ln()).max(0.0))
}

/// Counts over all 2^n outcomes normalized to a probability vector.
pub fn empirical_distribution(bitstrings: &[u64], n_qubits: usize) -> Result<Vec<f64>> {
    check_sample(bitstrings, n_qubits)?;
    if n_qubits > crate::statevector::MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits,
            max: crate::statevector::MAX_QUBITS,
        });
    }
    let mut p = vec![0.0; 1 << n_qubits];
    let w = 1.0 / bitstrings.len() as f64;
    for &b in bitstrings {
        p[b as usize] += w;
    }
    Ok(p)
}

/// ½ Σ singular values of ρ1 − ρ2.
pub fn trace_distance_quantum(rho1: &DensityMatrix2x2, rho2: &DensityMatrix2x2) -> Result<f64> {
    rho1.validate()?;
    rho2.validate()?;
    let (a, b) = (rho1.entries(), rho2.entries());
    let diff = [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]];
    // The difference is Hermitian, so singular values are |eigenvalues|.
    let [l0, l1] = hermitian_eigenvalues(&diff);
    Ok(0.5 * (l0.abs() + l1.abs()))
}

/// Optimal probability of telling two states apart from one copy, (1 + D)/2.
pub fn distinguish_probability(trace_distance: f64) -> f64 {
    (1.0 + trace_distance) / 2.0
}

/// Bell states of the two environment qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    /// Amplitudes (α, β, γ, δ) on |q1 q2⟩ = |00⟩, |01⟩, |10⟩, |11⟩.
    /// Φ± = (|00⟩ ± |11⟩)/√2, Ψ± = (|10⟩ ± |01⟩)/√2.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let (z, r) = (Complex64::new(0.0, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0));
        match self {
            BellState::PhiPlus => [r, z, z, r],
            BellState::PhiMinus => [r, z, z, -r],
            BellState::PsiPlus => [z, r, r, z],
            BellState::PsiMinus => [z, -r, r, z],
        }
    }

    fn is_phi(self) -> bool {
        matches!(self, BellState::PhiPlus | BellState::PhiMinus)
    }
}

/// Dimensionless crosstalk phase τ = J·t with J in kHz and t in µs,
/// the same angle the crosstalk engine accumulates.
pub fn crosstalk_tau(j_khz: f64, t_us: f64) -> f64 {
    j_khz * KHZ_US * t_us
}

/// Trace distance between the target states evolved from |+⟩ and |−⟩ when
/// the two neighbors start in `bell`: |cos 2(τ01 ± τ02)|.
pub fn analytic_bell_trace_distance(j01_khz: f64, j02_khz: f64, t_us: f64, bell: BellState) -> f64 {
    let (t01, t02) = (crosstalk_tau(j01_khz, t_us), crosstalk_tau(j02_khz, t_us));
    if bell.is_phi() {
        (2.0 * (t01 + t02)).cos().abs()
    } else {
        (2.0 * (t01 - t02)).cos().abs()
    }
}

/// |B| for a general environment state, where the off-diagonal element of
/// the target's reduced state is B = ½ Σ_e |a_e|² exp(−2i(τ01 z1 + τ02 z2)).
/// The trace distance between the |+⟩ and |−⟩ branches is 2|B|.
pub fn general_b_coefficient(env: [Complex64; 4], tau01: f64, tau02: f64) -> Result<f64> {
    let norm: f64 = env.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("environment state has norm² {norm}, not 1")));
    }
    let b: Complex64 = env
        .iter()
        .enumerate()
        .map(|(e, a)| {
            let z1 = if e & 2 == 0 { 1.0 } else { -1.0 };
            let z2 = if e & 1 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(0.5 * a.norm_sqr(), -2.0 * (tau01 * z1 + tau02 * z2))
        })
        .sum();
    Ok(b.norm())
}

#[cfg(test)]
mod tests;
