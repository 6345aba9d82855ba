//! The modeled chip: qubit graph, always-on ZZ couplings, coherence times and
//! gate timing.
//!
//! Units are fixed: couplings in kHz, coherence times in µs, gate durations in
//! ns. An Ising time is the plain product `J[kHz] · t[µs] · 1e-3`, and the
//! same product is the ZZ phase angle a coupling accrues while idling.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `J[kHz] · t[µs] · KHZ_US` is dimensionless.
pub const KHZ_US: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub id: usize,
    pub t1_us: f64,
    pub t2_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    pub j_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub single_ns: f64,
    pub identity_ns: f64,
    pub cnot_ns: f64,
    pub cnot_error: f64,
    #[serde(default)]
    pub readout_error: f64,
}

/// On-disk device document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceDoc {
    pub name: String,
    pub qubits: Vec<QubitSpec>,
    pub couplings: Vec<Coupling>,
    pub gates: GateSpec,
}

/// A validated device. Qubits are stored in id order; couplings with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    name: String,
    qubits: Vec<QubitSpec>,
    couplings: BTreeMap<(usize, usize), f64>,
    gates: GateSpec,
}

pub const PRESETS: [&str; 3] = ["qx2-like", "qx4-like", "qx14-like"];

impl DeviceModel {
    pub fn from_doc(doc: DeviceDoc) -> Result<Self> {
        let n = doc.qubits.len();
        if n == 0 {
            return Err(Error::device("qubits", "device has no qubits"));
        }
        let mut qubits = doc.qubits;
        for (idx, q) in qubits.iter().enumerate() {
            let path = |f: &str| format!("qubits[{idx}].{f}");
            if q.id >= n {
                return Err(Error::device(path("id"), format!("id {} not in 0..{n}", q.id)));
            }
            if !(q.t1_us.is_finite() && q.t1_us > 0.0) {
                return Err(Error::device(path("t1_us"), "must be positive"));
            }
            if !(q.t2_us.is_finite() && q.t2_us > 0.0) {
                return Err(Error::device(path("t2_us"), "must be positive"));
            }
            if q.t2_us > 2.0 * q.t1_us {
                return Err(Error::device(
                    path("t2_us"),
                    format!("T2 = {} exceeds 2·T1 = {}", q.t2_us, 2.0 * q.t1_us),
                ));
            }
        }
        qubits.sort_by_key(|q| q.id);
        for (expect, q) in qubits.iter().enumerate() {
            if q.id != expect {
                return Err(Error::device("qubits", format!("duplicate qubit id {}", q.id)));
            }
        }

        let mut couplings = BTreeMap::new();
        for (idx, c) in doc.couplings.iter().enumerate() {
            let path = |f: &str| format!("couplings[{idx}].{f}");
            for (field, q) in [("a", c.a), ("b", c.b)] {
                if q >= n {
                    return Err(Error::device(path(field), format!("unknown qubit {q}")));
                }
            }
            if c.a == c.b {
                return Err(Error::device(path("b"), "self-loop coupling"));
            }
            if !(c.j_khz.is_finite() && c.j_khz > 0.0) {
                return Err(Error::device(path("j_khz"), format!("{} must be positive", c.j_khz)));
            }
            let key = (c.a.min(c.b), c.a.max(c.b));
            if couplings.insert(key, c.j_khz).is_some() {
                return Err(Error::device(
                    path("b"),
                    format!("duplicate coupling {}-{}", key.0, key.1),
                ));
            }
        }

        let g = &doc.gates;
        for (field, v) in [
            ("single_ns", g.single_ns),
            ("identity_ns", g.identity_ns),
            ("cnot_ns", g.cnot_ns),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::device(format!("gates.{field}"), "duration must be positive"));
            }
        }
        for (field, v) in [("cnot_error", g.cnot_error), ("readout_error", g.readout_error)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::device(format!("gates.{field}"), "probability outside [0, 1]"));
            }
        }

        Ok(Self {
            name: doc.name,
            qubits,
            couplings,
            gates: doc.gates,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DeviceDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("device document: {e}")))?;
        Self::from_doc(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "qx2-like" => include_str!("../presets/qx2-like.json"),
            "qx4-like" => include_str!("../presets/qx4-like.json"),
            "qx14-like" => include_str!("../presets/qx14-like.json"),
            other => {
                return Err(Error::Config(format!(
                    "unknown device preset {other:?} (expected one of {PRESETS:?})"
                )))
            }
        };
        Self::from_json(text)
    }

    /// A preset name, or otherwise a path to a device document.
    pub fn preset_or_file(spec: &str) -> Result<Self> {
        if PRESETS.contains(&spec) {
            Self::preset(spec)
        } else {
            Self::load(Path::new(spec))
        }
    }

    pub fn to_doc(&self) -> DeviceDoc {
        DeviceDoc {
            name: self.name.clone(),
            qubits: self.qubits.clone(),
            couplings: self
                .couplings
                .iter()
                .map(|(&(a, b), &j_khz)| Coupling { a, b, j_khz })
                .collect(),
            gates: self.gates.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("device document serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitSpec] {
        &self.qubits
    }

    pub fn qubit(&self, id: usize) -> Option<&QubitSpec> {
        self.qubits.get(id)
    }

    pub fn gates(&self) -> &GateSpec {
        &self.gates
    }

    /// Couplings as `(a, b, j_khz)` with `a < b`, in sorted order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(a, b), &j)| (a, b, j))
    }

    pub fn n_couplings(&self) -> usize {
        self.couplings.len()
    }

    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        self.couplings.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn neighbors(&self, q: usize) -> BTreeSet<usize> {
        self.couplings
            .keys()
            .filter_map(|&(a, b)| match (a == q, b == q) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    /// Couplings with both endpoints in `qubits`.
    pub fn couplings_within(&self, qubits: &[usize]) -> Vec<(usize, usize, f64)> {
        let set: BTreeSet<usize> = qubits.iter().copied().collect();
        self.couplings()
            .filter(|(a, b, _)| set.contains(a) && set.contains(b))
            .collect()
    }

    pub fn mean_coupling_khz(&self) -> Result<f64> {
        if self.couplings.is_empty() {
            return Err(Error::invalid("device has no couplings"));
        }
        Ok(self.couplings.values().sum::<f64>() / self.couplings.len() as f64)
    }

    /// A copy with every coupling multiplied by `factor`.
    pub fn with_coupling_scale(&self, factor: f64) -> Result<Self> {
        let mut doc = self.to_doc();
        for c in &mut doc.couplings {
            c.j_khz *= factor;
        }
        Self::from_doc(doc)
    }
}

/// Device-averaged Ising times `(mean J · mean T1, mean J · mean T2)`.
pub fn mean_ising_times(device: &DeviceModel) -> Result<(f64, f64)> {
    let j = device.mean_coupling_khz()?;
    let n = device.n_qubits() as f64;
    let t1 = device.qubits().iter().map(|q| q.t1_us).sum::<f64>() / n;
    let t2 = device.qubits().iter().map(|q| q.t2_us).sum::<f64>() / n;
    Ok((j * t1 * KHZ_US, j * t2 * KHZ_US))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalCoupling {
    pub j_opt_khz: f64,
    /// Per-step error `√(t_1q / t_coh)` at the optimum.
    pub min_error: f64,
}

/// Minimizes the per-step error model `J·t_1q + 1/(J·t_coh)`.
pub fn optimal_coupling(t_1q_ns: f64, t_coh_us: f64) -> Result<OptimalCoupling> {
    if !(t_1q_ns > 0.0 && t_coh_us > 0.0) {
        return Err(Error::invalid("durations must be positive"));
    }
    let t_1q = t_1q_ns * 1e-9;
    let t_coh = t_coh_us * 1e-6;
    Ok(OptimalCoupling {
        j_opt_khz: 1.0 / (t_1q * t_coh).sqrt() * 1e-3,
        min_error: (t_1q / t_coh).sqrt(),
    })
}

/// The error model itself, `J·t_1q + 1/(J·t_coh)`.
pub fn step_error(j_khz: f64, t_1q_ns: f64, t_coh_us: f64) -> f64 {
    let j = j_khz * 1e3;
    j * t_1q_ns * 1e-9 + 1.0 / (j * t_coh_us * 1e-6)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleBlock {
    /// Number of identity gates.
    pub count: u64,
    /// `t_phys − count · T_I`, in ns.
    pub residual_ns: f64,
}

/// Identity-gate count `M = round(t_phys / T_I)`.
pub fn idle_block_length(t_phys_ns: f64, t_identity_ns: f64) -> Result<IdleBlock> {
    if !(t_phys_ns >= 0.0) || !(t_identity_ns > 0.0) {
        return Err(Error::invalid("need t_phys >= 0 and T_I > 0"));
    }
    let count = (t_phys_ns / t_identity_ns).round();
    Ok(IdleBlock {
        count: count as u64,
        residual_ns: t_phys_ns - count * t_identity_ns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_device(n: usize, edges: &[(usize, usize)], j: f64, t1: f64, t2: f64) -> DeviceModel {
        DeviceModel::from_doc(DeviceDoc {
            name: "test".into(),
            qubits: (0..n).map(|id| QubitSpec { id, t1_us: t1, t2_us: t2 }).collect(),
            couplings: edges.iter().map(|&(a, b)| Coupling { a, b, j_khz: j }).collect(),
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
    fn presets_load() {
        let qx2 = DeviceModel::preset("qx2-like").unwrap();
        assert_eq!(qx2.n_qubits(), 5);
        assert_eq!(qx2.n_couplings(), 6);
        let qx14 = DeviceModel::preset("qx14-like").unwrap();
        assert_eq!(qx14.n_qubits(), 14);
        assert_eq!(qx14.neighbors(1), BTreeSet::from([0, 2, 13]));
        assert!(DeviceModel::preset("qx99").is_err());
        for name in PRESETS {
            let d = DeviceModel::preset(name).unwrap();
            assert!(d.couplings().all(|(_, _, j)| (50.0..=100.0).contains(&j)));
        }
    }

    #[test]
    fn rejects_negative_coupling() {
        let text = include_str!("../presets/qx2-like.json").replacen("60.0", "-10.0", 1);
        match DeviceModel::from_json(&text) {
            Err(Error::Device { path, .. }) => assert_eq!(path, "couplings[0].j_khz"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_pair_and_self_loop() {
        let mut doc = DeviceModel::preset("qx2-like").unwrap().to_doc();
        doc.couplings.push(Coupling { a: 1, b: 0, j_khz: 70.0 });
        assert!(matches!(DeviceModel::from_doc(doc), Err(Error::Device { .. })));
        let mut doc = DeviceModel::preset("qx2-like").unwrap().to_doc();
        doc.couplings.push(Coupling { a: 3, b: 3, j_khz: 70.0 });
        assert!(matches!(DeviceModel::from_doc(doc), Err(Error::Device { .. })));
    }

    #[test]
    fn rejects_unphysical_coherence_and_probabilities() {
        let mut doc = DeviceModel::preset("qx2-like").unwrap().to_doc();
        doc.qubits[2].t2_us = 2.0 * doc.qubits[2].t1_us + 1.0;
        match DeviceModel::from_doc(doc) {
            Err(Error::Device { path, .. }) => assert_eq!(path, "qubits[2].t2_us"),
            other => panic!("unexpected {other:?}"),
        }
        let mut doc = DeviceModel::preset("qx2-like").unwrap().to_doc();
        doc.gates.cnot_error = 1.5;
        assert!(DeviceModel::from_doc(doc).is_err());
        let mut doc = DeviceModel::preset("qx2-like").unwrap().to_doc();
        doc.gates.cnot_ns = 0.0;
        assert!(DeviceModel::from_doc(doc).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = include_str!("../presets/qx2-like.json").replacen("\"name\"", "\"colour\": 1, \"name\"", 1);
        assert!(matches!(DeviceModel::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn readout_error_defaults_to_zero() {
        let text = include_str!("../presets/qx2-like.json").replace(",\n    \"readout_error\": 0.0", "");
        assert!(!text.contains("readout_error"));
        assert_eq!(DeviceModel::from_json(&text).unwrap().gates().readout_error, 0.0);
    }

    #[test]
    fn loader_round_trip() {
        for name in PRESETS {
            let d = DeviceModel::preset(name).unwrap();
            let again = DeviceModel::from_json(&d.to_json()).unwrap();
            assert_eq!(d, again);
        }
    }

    #[test]
    fn mean_ising_times_match_chip_figures() {
        let d = uniform_device(3, &[(0, 1), (1, 2)], 60.0, 71.7, 63.3);
        let (a, b) = mean_ising_times(&d).unwrap();
        assert!((a - 4.3).abs() < 0.01 && (b - 3.8).abs() < 0.01, "{a} {b}");

        let d = uniform_device(2, &[(0, 1)], 80.0, 40.0, 30.0);
        assert_eq!(mean_ising_times(&d).unwrap().0, 80.0 * 40.0 * KHZ_US);

        let (a, b) = mean_ising_times(&DeviceModel::preset("qx2-like").unwrap()).unwrap();
        assert!((a - 4.3).abs() < 0.01 && (b - 3.8).abs() < 0.01);
        let (a, b) = mean_ising_times(&DeviceModel::preset("qx14-like").unwrap()).unwrap();
        assert!((a - 2.6).abs() < 0.01 && (b - 3.6).abs() < 0.01);

        let empty = uniform_device(2, &[], 1.0, 10.0, 10.0);
        assert!(mean_ising_times(&empty).is_err());
    }

    #[test]
    fn optimal_coupling_values() {
        let o = optimal_coupling(50.0, 100.0).unwrap();
        assert!((o.j_opt_khz - 447.2).abs() < 0.1);
        assert!((o.min_error - 0.02236).abs() < 1e-4);
        // Symmetry point: t_1q = t_coh = 1 µs.
        let o = optimal_coupling(1000.0, 1.0).unwrap();
        assert!((o.j_opt_khz - 1000.0).abs() < 1e-9);
        assert!((o.min_error - 1.0).abs() < 1e-12);
        assert!(optimal_coupling(0.0, 1.0).is_err());
        assert!(optimal_coupling(50.0, -1.0).is_err());
        // Order of magnitude ~1 MHz for t_coh in 50..100 µs.
        for t in [50.0, 75.0, 100.0] {
            let j = optimal_coupling(50.0, t).unwrap().j_opt_khz;
            assert!((300.0..3000.0).contains(&j));
        }
    }

    #[test]
    fn idle_blocks() {
        assert_eq!(idle_block_length(10_000.0, 100.0).unwrap().count, 100);
        assert_eq!(idle_block_length(0.0, 100.0).unwrap().count, 0);
        let b = idle_block_length(150.0, 100.0).unwrap();
        assert_eq!(b.count, 2);
        assert_eq!(b.residual_ns, -50.0);
        assert!(idle_block_length(-1.0, 100.0).is_err());
    }

    proptest! {
        #[test]
        fn error_terms_balance_at_optimum(t1q in 1.0..1000.0f64, tcoh in 1.0..1000.0f64) {
            let o = optimal_coupling(t1q, tcoh).unwrap();
            let j_hz = o.j_opt_khz * 1e3;
            let gate_term = j_hz * t1q * 1e-9;
            let idle_term = 1.0 / (j_hz * tcoh * 1e-6);
            prop_assert!((gate_term - o.min_error).abs() <= 1e-9 * o.min_error.max(1.0));
            prop_assert!((idle_term - o.min_error).abs() <= 1e-9 * o.min_error.max(1.0));
        }

        #[test]
        fn mean_ising_times_permutation_invariant(seed in 0u64..500) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = DeviceModel::preset("qx4-like").unwrap();
            let mut doc = d.to_doc();
            doc.qubits.shuffle(&mut rng);
            doc.couplings.shuffle(&mut rng);
            let shuffled = DeviceModel::from_doc(doc).unwrap();
            let (a, b) = mean_ising_times(&d).unwrap();
            let (c, e) = mean_ising_times(&shuffled).unwrap();
            prop_assert!((a - c).abs() < 1e-12 && (b - e).abs() < 1e-12);
        }
    }
}
