//! Transverse-field Ising model with optional longitudinal disorder,
//!
//! `H = −Σ J_ij Z_i Z_j − Σ h_j X_j − Σ ε_j Z_j`,
//!
//! and the map between simulated time and physical idle time on a device.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceModel, KHZ_US};
use crate::error::{Error, Result};
use crate::rng;
use crate::statevector::{Hamiltonian, PauliTerm};

/// Simulated time `t` and physical time `t_phys` obey `J t = J_phys t_phys`
/// for every edge, i.e. `t_phys[µs] = t · scale_us`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMap {
    scale_us: f64,
}

impl TimeMap {
    pub fn new(scale_us: f64) -> Result<Self> {
        if !(scale_us.is_finite() && scale_us > 0.0) {
            return Err(Error::invalid(format!("time scale {scale_us} must be positive")));
        }
        Ok(Self { scale_us })
    }

    /// Physical µs per unit of simulated time.
    pub fn scale_us(&self) -> f64 {
        self.scale_us
    }
}

pub fn map_time(t: f64, tm: TimeMap) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("negative time {t}")));
    }
    Ok(t * tm.scale_us)
}

pub fn unmap_time(t_phys_us: f64, tm: TimeMap) -> Result<f64> {
    if !(t_phys_us >= 0.0) {
        return Err(Error::invalid(format!("negative time {t_phys_us}")));
    }
    Ok(t_phys_us / tm.scale_us)
}

/// How transverse fields are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldRule {
    /// Every spin gets twice the mean coupling.
    Uniform2JBar,
    /// Both ends of the named edge get twice its coupling; all other spins 0.
    PerPair2J(usize, usize),
    /// One value per spin, in model order.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    /// Disorder is drawn from `U[−a·J̄, a·J̄]`.
    pub amplitude_factor: f64,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self {
            amplitude_factor: 2.0,
            realizations: 10,
            seed: 0,
        }
    }
}

impl DisorderSpec {
    /// Disorder fields of one realization.
    pub fn realization(&self, j_bar: f64, n_spins: usize, index: usize) -> Result<Vec<f64>> {
        let mut r = rng::stream(self.seed, index as u64, rng::DISORDER);
        sample_disorder_scaled(self.amplitude_factor * j_bar, n_spins, &mut r)
    }
}

/// `n_spins` draws from `U[−2·j_bar, 2·j_bar]`.
pub fn sample_disorder<R: Rng + ?Sized>(j_bar: f64, n_spins: usize, rng: &mut R) -> Result<Vec<f64>> {
    sample_disorder_scaled(2.0 * j_bar, n_spins, rng)
}

fn sample_disorder_scaled<R: Rng + ?Sized>(width: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid("disorder amplitude must be positive"));
    }
    Ok((0..n).map(|_| rng.random_range(-width..=width)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    h: Vec<f64>,
    eps: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    /// Device qubit backing each spin, for device-derived models.
    device_qubits: Option<Vec<usize>>,
    time_map: Option<TimeMap>,
}

impl SpinModel {
    /// A model not tied to any device.
    pub fn explicit(h: Vec<f64>, couplings: &[(usize, usize, f64)], eps: Option<Vec<f64>>) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::invalid("model needs at least one spin"));
        }
        let eps = eps.unwrap_or_else(|| vec![0.0; n]);
        if eps.len() != n {
            return Err(Error::invalid(format!("{} disorder values for {n} spins", eps.len())));
        }
        if h.iter().chain(&eps).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite field"));
        }
        let mut map = BTreeMap::new();
        for &(a, b, j) in couplings {
            if a >= n || b >= n || a == b {
                return Err(Error::invalid(format!("bad edge ({a}, {b}) for {n} spins")));
            }
            if !j.is_finite() {
                return Err(Error::invalid("non-finite coupling"));
            }
            if map.insert((a.min(b), a.max(b)), j).is_some() {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self {
            h,
            eps,
            couplings: map,
            device_qubits: None,
            time_map: None,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.h.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn disorder(&self) -> &[f64] {
        &self.eps
    }

    pub fn has_disorder(&self) -> bool {
        self.eps.iter().any(|&e| e != 0.0)
    }

    /// Edges `(a, b, J)` with `a < b`, sorted.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(a, b), &j)| (a, b, j))
    }

    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        self.couplings.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn mean_coupling(&self) -> Result<f64> {
        if self.couplings.is_empty() {
            return Err(Error::invalid("model has no couplings"));
        }
        Ok(self.couplings.values().sum::<f64>() / self.couplings.len() as f64)
    }

    pub fn device_qubits(&self) -> Option<&[usize]> {
        self.device_qubits.as_deref()
    }

    pub fn time_map(&self) -> Option<TimeMap> {
        self.time_map
    }

    pub fn with_disorder(mut self, eps: Vec<f64>) -> Result<Self> {
        if eps.len() != self.n_spins() || eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("disorder length mismatch or non-finite value"));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_fields(mut self, h: Vec<f64>) -> Result<Self> {
        if h.len() != self.n_spins() || h.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("field length mismatch or non-finite value"));
        }
        self.h = h;
        Ok(self)
    }

    /// Checks that every coupling equals `j_phys · scale` for the backing
    /// device edge, which is what an idle-based realization needs.
    pub fn check_device_consistent(&self, device: &DeviceModel) -> Result<TimeMap> {
        let (Some(qubits), Some(tm)) = (&self.device_qubits, self.time_map) else {
            return Err(Error::Config("model is not derived from a device".into()));
        };
        let expected = device_couplings(device, qubits);
        if expected.len() != self.couplings.len() {
            return Err(Error::Config("model edges do not match the device".into()));
        }
        for (a, b, j_phys) in expected {
            let want = j_phys * KHZ_US * tm.scale_us;
            match self.coupling(a, b) {
                Some(j) if (j - want).abs() <= 1e-12 * want.abs().max(1.0) => {}
                _ => {
                    return Err(Error::Config(format!(
                        "coupling ({a}, {b}) does not follow the device ratio"
                    )))
                }
            }
        }
        Ok(tm)
    }

    /// The Hamiltonian as Pauli terms, for the dense oracle.
    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        let mut terms = Vec::new();
        for (q, (&h, &e)) in self.h.iter().zip(&self.eps).enumerate() {
            if h != 0.0 {
                terms.push(PauliTerm::X { qubit: q, coeff: -h });
            }
            if e != 0.0 {
                terms.push(PauliTerm::Z { qubit: q, coeff: -e });
            }
        }
        for (i, j, c) in self.couplings() {
            terms.push(PauliTerm::ZZ { i, j, coeff: -c });
        }
        Hamiltonian::new(self.n_spins(), terms)
    }
}

/// Device edges among `qubits`, re-indexed to positions in `qubits`.
fn device_couplings(device: &DeviceModel, qubits: &[usize]) -> Vec<(usize, usize, f64)> {
    let pos: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    device
        .couplings_within(qubits)
        .into_iter()
        .map(|(a, b, j)| {
            let (pa, pb) = (pos[&a], pos[&b]);
            (pa.min(pb), pa.max(pb), j)
        })
        .collect()
}

/// TFIM on every device qubit.
pub fn build_tfim(device: &DeviceModel, rule: &FieldRule, eps: Option<Vec<f64>>) -> Result<SpinModel> {
    let all: Vec<usize> = (0..device.n_qubits()).collect();
    build_tfim_on(device, &all, rule, eps)
}

/// TFIM on the given device qubits, with the induced couplings. The time
/// scale normalizes the mean coupling of this subgraph to 1.
pub fn build_tfim_on(
    device: &DeviceModel,
    qubits: &[usize],
    rule: &FieldRule,
    eps: Option<Vec<f64>>,
) -> Result<SpinModel> {
    let edges = device_couplings(device, qubits);
    if edges.is_empty() {
        return Err(Error::Config("selected qubits share no coupling".into()));
    }
    let mean_phys = edges.iter().map(|e| e.2 * KHZ_US).sum::<f64>() / edges.len() as f64;
    let tm = TimeMap::new(1.0 / mean_phys)?;
    build_scaled(device, qubits, rule, eps, tm)
}

/// As [`build_tfim_on`] but with a given time scale.
pub fn build_scaled(
    device: &DeviceModel,
    qubits: &[usize],
    rule: &FieldRule,
    eps: Option<Vec<f64>>,
    tm: TimeMap,
) -> Result<SpinModel> {
    let mut seen = std::collections::BTreeSet::new();
    for &q in qubits {
        if q >= device.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: device.n_qubits(),
            });
        }
        if !seen.insert(q) {
            return Err(Error::invalid(format!("qubit {q} listed twice")));
        }
    }
    let n = qubits.len();
    let edges: Vec<_> = device_couplings(device, qubits)
        .into_iter()
        .map(|(a, b, j)| (a, b, j * KHZ_US * tm.scale_us))
        .collect();
    let mut model = SpinModel::explicit(vec![0.0; n], &edges, eps)?;
    let h = match rule {
        FieldRule::Uniform2JBar => vec![2.0 * model.mean_coupling()?; n],
        FieldRule::PerPair2J(a, b) => {
            let pos = |q: usize| {
                qubits
                    .iter()
                    .position(|&x| x == q)
                    .ok_or_else(|| Error::Config(format!("field rule names qubit {q} outside the model")))
            };
            let (pa, pb) = (pos(*a)?, pos(*b)?);
            let j = model
                .coupling(pa, pb)
                .ok_or_else(|| Error::Config(format!("field rule names missing edge ({a}, {b})")))?;
            let mut h = vec![0.0; n];
            h[pa] = 2.0 * j;
            h[pb] = 2.0 * j;
            h
        }
        FieldRule::Explicit(h) => h.clone(),
    };
    model = model.with_fields(h)?;
    model.device_qubits = Some(qubits.to_vec());
    model.time_map = Some(tm);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{Coupling, DeviceDoc, GateSpec, QubitSpec};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn device(n: usize, edges: &[(usize, usize, f64)]) -> DeviceModel {
        DeviceModel::from_doc(DeviceDoc {
            name: "t".into(),
            qubits: (0..n).map(|id| QubitSpec { id, t1_us: 50.0, t2_us: 50.0 }).collect(),
            couplings: edges.iter().map(|&(a, b, j_khz)| Coupling { a, b, j_khz }).collect(),
            gates: GateSpec {
                single_ns: 50.0,
                identity_ns: 100.0,
                cnot_ns: 300.0,
                cnot_error: 0.02,
                readout_error: 0.0,
            },
        })
        .unwrap()
    }

    #[test]
    fn per_pair_field_rule() {
        let d = device(2, &[(0, 1, 80.0)]);
        let m = build_tfim(&d, &FieldRule::PerPair2J(0, 1), None).unwrap();
        let j = m.coupling(0, 1).unwrap();
        assert_eq!(m.fields(), &[2.0 * j, 2.0 * j]);
        assert!(m.disorder().iter().all(|&e| e == 0.0));
        assert!(build_tfim(&d, &FieldRule::PerPair2J(0, 5), None).is_err());
    }

    #[test]
    fn uniform_field_rule_on_preset() {
        let d = DeviceModel::preset("qx2-like").unwrap();
        let m = build_tfim(&d, &FieldRule::Uniform2JBar, None).unwrap();
        let jbar = m.mean_coupling().unwrap();
        assert!((jbar - 1.0).abs() < 1e-12);
        assert!(m.fields().iter().all(|&h| (h - 2.0 * jbar).abs() < 1e-15));
    }

    #[test]
    fn coupling_ratios_follow_device() {
        let d = DeviceModel::preset("qx4-like").unwrap();
        let m = build_tfim(&d, &FieldRule::Uniform2JBar, None).unwrap();
        let pairs: Vec<_> = d.couplings().collect();
        for &(a, b, ja) in &pairs {
            for &(c, e, jc) in &pairs {
                let r_model = m.coupling(a, b).unwrap() / m.coupling(c, e).unwrap();
                assert!((r_model - ja / jc).abs() <= 1e-12 * (ja / jc));
            }
        }
        assert!(m.check_device_consistent(&d).is_ok());
        let skewed = m.clone().with_fields(vec![0.0; 5]).unwrap();
        assert!(skewed.check_device_consistent(&d).is_ok());
        let explicit = SpinModel::explicit(vec![0.0; 2], &[(0, 1, 1.0)], None).unwrap();
        assert!(explicit.check_device_consistent(&d).is_err());
    }

    #[test]
    fn time_map_examples() {
        let unit = TimeMap::new(1.0).unwrap();
        assert_eq!(map_time(3.7, unit).unwrap(), 3.7);
        assert!(map_time(-1.0, unit).is_err());
        assert!(TimeMap::new(0.0).is_err());

        // 50 kHz coupling: Ising time 2.5 lands at 50 µs.
        let d = device(2, &[(0, 1, 50.0)]);
        let m = build_tfim(&d, &FieldRule::PerPair2J(0, 1), None).unwrap();
        let tm = m.time_map().unwrap();
        let jt = 2.5;
        let t = jt / m.coupling(0, 1).unwrap();
        assert!((map_time(t, tm).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn disorder_sampling() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let eps = sample_disorder(0.7, 100_000, &mut r).unwrap();
        assert!(eps.iter().all(|e| e.abs() <= 1.4));
        let mean = eps.iter().sum::<f64>() / eps.len() as f64;
        // Var of U[−a, a] is a²/3.
        let sigma = (1.4f64 * 1.4 / 3.0 / eps.len() as f64).sqrt();
        assert!(mean.abs() < 5.0 * sigma, "{mean}");
        let a = sample_disorder(0.7, 14, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_disorder(0.7, 14, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(sample_disorder(0.0, 3, &mut r).is_err());

        let spec = DisorderSpec { seed: 4, ..Default::default() };
        assert_eq!(spec.realization(1.0, 14, 2).unwrap(), spec.realization(1.0, 14, 2).unwrap());
        assert_ne!(spec.realization(1.0, 14, 2).unwrap(), spec.realization(1.0, 14, 3).unwrap());
    }

    /// Independent dense TFIM built from Kronecker products.
    fn tfim_oracle(h: &[f64], edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
        let n = h.len();
        let id = DMatrix::<f64>::identity(2, 2);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        // Qubit 0 is the least significant bit, so it is the rightmost factor.
        let op = |sites: &[(usize, &DMatrix<f64>)]| {
            let mut m = DMatrix::<f64>::identity(1, 1);
            for q in (0..n).rev() {
                let f = sites.iter().find(|s| s.0 == q).map(|s| s.1).unwrap_or(&id);
                m = m.kronecker(f);
            }
            m
        };
        let dim = 1 << n;
        let mut total = DMatrix::<f64>::zeros(dim, dim);
        for (q, &hq) in h.iter().enumerate() {
            total -= op(&[(q, &x)]) * hq;
        }
        for &(a, b, j) in edges {
            total -= op(&[(a, &z), (b, &z)]) * j;
        }
        total
    }

    #[test]
    fn hamiltonian_matches_oracle() {
        let d = DeviceModel::preset("qx4-like").unwrap();
        let m = build_tfim(&d, &FieldRule::Uniform2JBar, None).unwrap();
        let mat = m.hamiltonian().unwrap().dense_matrix().unwrap();
        assert!((&mat - mat.transpose()).amax() < 1e-15);
        let edges: Vec<_> = m.couplings().collect();
        let oracle = tfim_oracle(m.fields(), &edges);
        assert!((&mat - &oracle).amax() < 1e-12);
        let mut a = m.hamiltonian().unwrap().eigenvalues().unwrap();
        let mut b: Vec<f64> = oracle.symmetric_eigen().eigenvalues.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn time_map_round_trip(t in 0.0..1e3f64, s in 1e-3..1e3f64) {
            let tm = TimeMap::new(s).unwrap();
            let back = unmap_time(map_time(t, tm).unwrap(), tm).unwrap();
            prop_assert!((back - t).abs() <= 1e-12 * t.max(1e-300));
        }
    }
}
