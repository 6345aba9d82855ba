//! Trajectory execution of schedules on a device: T1 jumps, pure dephasing,
//! depolarizing CNOT errors, always-on ZZ crosstalk and readout flips.
//!
//! Between gates every process is diagonal in the computational basis, so each
//! timed moment is integrated exactly: the no-jump propagator
//! `exp(−i E_k d − Γ_k d / 2)` is applied per basis state, a jump time is
//! found by bisection on the no-jump probability, and dephasing flips are
//! drawn at the end of the interval.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compiler::{GateOp, Moment, Schedule};
use crate::device::{DeviceModel, KHZ_US};
use crate::error::{Error, Result};
use crate::rng;
use crate::statevector::{gates, kernels, Mat2, Sampler, StateVector, ZzTerm};

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub enable_t1: bool,
    /// Pure dephasing at `1/Tφ = 1/T2 − 1/(2 T1)`.
    pub enable_t2: bool,
    pub cnot_depol: f64,
    pub crosstalk_during_gates: bool,
    pub readout_flip: f64,
    /// Resolution of jump times, ns.
    pub dt_noise_ns: f64,
    /// Multiplies every crosstalk coupling.
    pub crosstalk_scale: f64,
    /// Multiplies decoherence rates.
    pub decoherence_scale: f64,
}

impl NoiseModel {
    /// Everything on, with the device's error figures.
    pub fn from_device(device: &DeviceModel) -> Self {
        Self {
            enable_t1: true,
            enable_t2: true,
            cnot_depol: device.gates().cnot_error,
            crosstalk_during_gates: true,
            readout_flip: device.gates().readout_error,
            dt_noise_ns: 100.0,
            crosstalk_scale: 1.0,
            decoherence_scale: 1.0,
        }
    }

    /// Ideal gates; crosstalk only while idling.
    pub fn noiseless() -> Self {
        Self {
            enable_t1: false,
            enable_t2: false,
            cnot_depol: 0.0,
            crosstalk_during_gates: false,
            readout_flip: 0.0,
            dt_noise_ns: 100.0,
            crosstalk_scale: 1.0,
            decoherence_scale: 1.0,
        }
    }

    /// Scales decoherence rates and both error probabilities.
    pub fn with_noise_scale(mut self, factor: f64) -> Self {
        self.decoherence_scale *= factor;
        self.cnot_depol = (self.cnot_depol * factor).min(1.0);
        self.readout_flip = (self.readout_flip * factor).min(1.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("cnot_depol", self.cnot_depol), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.dt_noise_ns > 0.0) {
            return Err(Error::Config("dt_noise must be positive".into()));
        }
        if !(self.crosstalk_scale >= 0.0 && self.decoherence_scale >= 0.0) {
            return Err(Error::Config("scales must be non-negative".into()));
        }
        Ok(())
    }

    /// Whether any process draws random numbers during a run.
    pub fn is_stochastic(&self) -> bool {
        (self.decoherence_scale > 0.0 && (self.enable_t1 || self.enable_t2))
            || self.cnot_depol > 0.0
            || self.readout_flip > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub n_qubits: usize,
    /// One measured basis index per run, qubit 0 in bit 0.
    pub bitstrings: Vec<u64>,
    pub master_seed: u64,
    pub total_phys_time_ns: f64,
}

impl RunResult {
    pub fn n_runs(&self) -> usize {
        self.bitstrings.len()
    }

    pub fn counts(&self) -> BTreeMap<u64, usize> {
        let mut m = BTreeMap::new();
        for &b in &self.bitstrings {
            *m.entry(b).or_insert(0) += 1;
        }
        m
    }

    pub fn distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; 1 << self.n_qubits];
        let w = 1.0 / self.n_runs() as f64;
        for &b in &self.bitstrings {
            p[b as usize] += w;
        }
        p
    }
}

/// One ZZ term per device coupling among `qubits`, for an interval of
/// `d_ns`, in local indices: `θ = −J_phys · d`.
pub fn crosstalk_phase_for(device: &DeviceModel, qubits: &[usize], d_ns: f64) -> Result<Vec<ZzTerm>> {
    if !(d_ns >= 0.0) {
        return Err(Error::invalid("negative duration"));
    }
    Ok(local_edges(device, qubits)
        .into_iter()
        .map(|(i, j, khz)| ZzTerm::new(i, j, -khz * KHZ_US * d_ns * 1e-3))
        .collect())
}

fn local_edges(device: &DeviceModel, qubits: &[usize]) -> Vec<(usize, usize, f64)> {
    let pos = |q: usize| qubits.iter().position(|&x| x == q).unwrap();
    device
        .couplings_within(qubits)
        .into_iter()
        .map(|(a, b, j)| (pos(a), pos(b), j))
        .collect()
}

/// Single-qubit relaxation over `d_ns`: one stochastic step of the same
/// jump/no-jump process the engine uses, for a lone qubit.
pub fn apply_decoherence_interval<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    d_ns: f64,
    t1_us: f64,
    t2_us: f64,
    rng: &mut R,
) -> Result<()> {
    if qubit >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit,
            n_qubits: state.n_qubits(),
        });
    }
    if !(t1_us > 0.0 && t2_us > 0.0 && t2_us <= 2.0 * t1_us) || !(d_ns >= 0.0) {
        return Err(Error::invalid("need d >= 0, T1, T2 > 0 and T2 <= 2 T1"));
    }
    let gamma = 1.0 / (t1_us * 1e3);
    let dephase = 1.0 / (t2_us * 1e3) - gamma / 2.0;
    let mut remaining = d_ns;
    while remaining > 0.0 && gamma > 0.0 {
        let p1 = state.excited_population(qubit);
        let survive = 1.0 - p1 + p1 * (-gamma * remaining).exp();
        let r: f64 = rng.random();
        if survive >= r {
            let f = (-gamma * remaining / 2.0).exp();
            state.apply_1q_diagonal(qubit, Complex64::new(1.0, 0.0), Complex64::new(f, 0.0));
            state.normalize();
            break;
        }
        // 1 − p1 + p1 e^{−γ s} = r
        let s = -((r - 1.0 + p1) / p1).ln() / gamma;
        let s = s.clamp(0.0, remaining);
        state.apply_1q_unchecked(qubit, &lowering());
        state.normalize();
        remaining -= s;
    }
    flip_phase(state, qubit, d_ns, dephase, rng);
    Ok(())
}

fn lowering() -> Mat2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[z, o], [z, z]]
}

fn flip_phase<R: Rng + ?Sized>(state: &mut StateVector, qubit: usize, d_ns: f64, rate: f64, rng: &mut R) {
    if rate > 0.0 && d_ns > 0.0 {
        let p = (1.0 - (-d_ns * rate).exp()) / 2.0;
        if rng.random::<f64>() < p {
            state.apply_1q_diagonal(qubit, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        }
    }
}

/// Product of per-qubit diagonal gates, tabulated on the low and high halves
/// of the basis index.
#[derive(Debug, Clone)]
struct DiagLayer {
    split: usize,
    lo: Vec<Complex64>,
    hi: Vec<Complex64>,
}

impl DiagLayer {
    fn new(n: usize, diags: &mut [Option<(Complex64, Complex64)>]) -> Option<Self> {
        if diags.iter().all(Option::is_none) {
            return None;
        }
        let split = n / 2;
        let table = |range: std::ops::Range<usize>, diags: &[Option<(Complex64, Complex64)>]| {
            let width = range.len();
            (0..1usize << width)
                .map(|k| {
                    range.clone().fold(Complex64::new(1.0, 0.0), |acc, q| match diags[q] {
                        Some((d0, d1)) => acc * if k >> (q - range.start) & 1 == 0 { d0 } else { d1 },
                        None => acc,
                    })
                })
                .collect::<Vec<_>>()
        };
        let layer = Self {
            split,
            lo: table(0..split, diags),
            hi: table(split..n, diags),
        };
        diags.iter_mut().for_each(|d| *d = None);
        Some(layer)
    }

    #[inline]
    fn at(&self, k: usize) -> Complex64 {
        self.lo[k & ((1 << self.split) - 1)] * self.hi[k >> self.split]
    }

    fn apply(&self, state: &mut StateVector) {
        for (k, a) in state.amplitudes_mut().iter_mut().enumerate() {
            *a *= self.at(k);
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Rx { qubit: usize, c: f64, s: f64 },
    RxLayer(Vec<(usize, f64, f64)>),
    U1 { qubit: usize, m: Mat2 },
    Diag(DiagLayer),
    Cnot { control: usize, target: usize },
    /// A timed interval; deferred diagonal gates ride along since they
    /// commute with everything that happens in it.
    Segment { d_ns: f64, crosstalk: bool, diag: Option<DiagLayer> },
    Relabel(Vec<usize>),
}

/// A schedule lowered for repeated execution.
struct Program {
    n: usize,
    ops: Vec<Op>,
    /// Class of each basis state, by (crosstalk energy, decay rate).
    class_of: Vec<u32>,
    class_energy: Vec<f64>,
    class_decay: Vec<f64>,
    /// Per local qubit, per ns.
    gamma: Vec<f64>,
    dephase: Vec<f64>,
    noise: NoiseModel,
}

fn is_diagonal(m: &Mat2) -> bool {
    m[0][1] == Complex64::new(0.0, 0.0) && m[1][0] == Complex64::new(0.0, 0.0)
}

/// Builds the op list. Single-qubit gates are fused per qubit; diagonal ones
/// are deferred across timed intervals, which are merged when nothing
/// non-diagonal separates them.
struct Lowering {
    n: usize,
    ops: Vec<Op>,
    general: Vec<Option<Mat2>>,
    diag: Vec<Option<(Complex64, Complex64)>>,
    open: Option<(f64, bool)>,
}

impl Lowering {
    fn gate(&mut self, q: usize, m: Mat2) {
        if let Some(prev) = self.general[q] {
            self.general[q] = Some(gates::matmul(&m, &prev));
        } else if is_diagonal(&m) {
            let (d0, d1) = self.diag[q].unwrap_or((Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)));
            self.diag[q] = Some((m[0][0] * d0, m[1][1] * d1));
        } else {
            // Whatever interval is open ends here; let it absorb the pending
            // diagonals so this gate keeps its own form.
            self.close();
            let m = match self.diag[q].take() {
                Some((d0, d1)) => gates::matmul(&m, &[[d0, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), d1]]),
                None => m,
            };
            self.general[q] = Some(m);
        }
    }

    fn close(&mut self) {
        if let Some((d_ns, crosstalk)) = self.open.take() {
            let diag = DiagLayer::new(self.n, &mut self.diag);
            self.ops.push(Op::Segment { d_ns, crosstalk, diag });
        }
    }

    fn emit_general(&mut self, q: usize) {
        if let Some(m) = self.general[q].take() {
            self.close();
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            if m == [[one, zero], [zero, one]] {
                return;
            }
            let rx_like = m[0][0] == m[1][1]
                && m[0][0].im == 0.0
                && m[0][1] == m[1][0]
                && m[0][1].re == 0.0;
            self.ops.push(if rx_like {
                Op::Rx { qubit: q, c: m[0][0].re, s: -m[0][1].im }
            } else {
                Op::U1 { qubit: q, m }
            });
        }
    }

    fn emit_diag(&mut self, q: usize) {
        if let Some((d0, d1)) = self.diag[q].take() {
            let zero = Complex64::new(0.0, 0.0);
            self.ops.push(Op::U1 { qubit: q, m: [[d0, zero], [zero, d1]] });
        }
    }

    fn interval(&mut self, d_ns: f64, crosstalk: bool) {
        (0..self.n).for_each(|q| self.emit_general(q));
        match self.open {
            Some((d, x)) if x == crosstalk => self.open = Some((d + d_ns, x)),
            _ => {
                self.close();
                self.open = Some((d_ns, crosstalk));
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        self.close();
        for q in [control, target] {
            self.emit_general(q);
            self.emit_diag(q);
        }
        self.ops.push(Op::Cnot { control, target });
    }

    fn flush_all(&mut self) {
        self.close();
        (0..self.n).for_each(|q| self.emit_general(q));
        if let Some(layer) = DiagLayer::new(self.n, &mut self.diag) {
            self.ops.push(Op::Diag(layer));
        }
    }
}

/// Joins runs of x rotations on distinct qubits into one cache-blocked layer.
fn group_rotations(ops: Vec<Op>) -> Vec<Op> {
    let mut out = Vec::with_capacity(ops.len());
    let mut run: Vec<(usize, f64, f64)> = Vec::new();
    let flush = |run: &mut Vec<(usize, f64, f64)>, out: &mut Vec<Op>| match run.len() {
        0 => {}
        1 => {
            let (qubit, c, s) = run[0];
            out.push(Op::Rx { qubit, c, s });
            run.clear();
        }
        _ => out.push(Op::RxLayer(std::mem::take(run))),
    };
    for op in ops {
        match op {
            Op::Rx { qubit, c, s } => {
                if run.iter().any(|r| r.0 == qubit) {
                    flush(&mut run, &mut out);
                }
                run.push((qubit, c, s));
            }
            op => {
                flush(&mut run, &mut out);
                out.push(op);
            }
        }
    }
    flush(&mut run, &mut out);
    out
}

fn lower(schedule: &Schedule, device: Option<&DeviceModel>, noise: &NoiseModel) -> Result<Program> {
    schedule.validate()?;
    noise.validate()?;
    let n = schedule.n_qubits;
    if n > crate::statevector::MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            max: crate::statevector::MAX_QUBITS,
        });
    }
    let placed = match (device, &schedule.device_qubits) {
        (Some(d), Some(dq)) => {
            if let Some(&q) = dq.iter().find(|&&q| q >= d.n_qubits()) {
                return Err(Error::Schedule(format!("device has no qubit {q}")));
            }
            Some((d, dq.as_slice()))
        }
        (Some(_), None) => return Err(Error::Schedule("schedule is not placed on the device".into())),
        (None, _) => None,
    };

    let (mut gamma, mut dephase, edges) = match placed {
        Some((d, dq)) => {
            let mut gamma = Vec::new();
            let mut dephase = Vec::new();
            for &q in dq {
                let spec = d.qubit(q).unwrap();
                let g = 1.0 / (spec.t1_us * 1e3);
                gamma.push(g);
                dephase.push((1.0 / (spec.t2_us * 1e3) - g / 2.0).max(0.0));
            }
            let edges: Vec<(usize, usize, f64)> = local_edges(d, dq)
                .into_iter()
                .map(|(i, j, khz)| (i, j, -khz * KHZ_US * 1e-3 * noise.crosstalk_scale))
                .collect();
            (gamma, dephase, edges)
        }
        None => (vec![0.0; n], vec![0.0; n], Vec::new()),
    };
    for g in &mut gamma {
        *g *= if noise.enable_t1 { noise.decoherence_scale } else { 0.0 };
    }
    for g in &mut dephase {
        *g *= if noise.enable_t2 { noise.decoherence_scale } else { 0.0 };
    }

    let has_xt = !edges.is_empty();
    let has_decay = gamma.iter().any(|&g| g > 0.0);
    let has_dephase = dephase.iter().any(|&g| g > 0.0);

    let mut class_of = Vec::new();
    let mut class_energy = Vec::new();
    let mut class_decay = Vec::new();
    if has_xt || has_decay {
        let mut index: HashMap<(u64, u64), u32> = HashMap::new();
        class_of.reserve(1 << n);
        for k in 0usize..1 << n {
            let e: f64 = edges
                .iter()
                .map(|&(i, j, w)| if ((k >> i) ^ (k >> j)) & 1 == 0 { w } else { -w })
                .sum();
            let g: f64 = (0..n).filter(|q| k >> q & 1 == 1).map(|q| gamma[q]).sum();
            let id = *index.entry((e.to_bits(), g.to_bits())).or_insert_with(|| {
                class_energy.push(e);
                class_decay.push(g);
                class_energy.len() as u32 - 1
            });
            class_of.push(id);
        }
    }

    let mut lw = Lowering {
        n,
        ops: Vec::new(),
        general: vec![None; n],
        diag: vec![None; n],
        open: None,
    };
    for moment in &schedule.moments {
        match moment {
            Moment::Gates(list) => {
                for op in list {
                    match *op {
                        GateOp::One { qubit, gate, .. } => lw.gate(qubit, gate.matrix()),
                        GateOp::Cnot { control, target, .. } => lw.cnot(control, target),
                    }
                }
                let d = moment.duration_ns();
                let crosstalk = has_xt && noise.crosstalk_during_gates;
                if d > 0.0 && (crosstalk || has_decay || has_dephase) {
                    lw.interval(d, crosstalk);
                }
            }
            Moment::Idle { duration_ns } => {
                if *duration_ns > 0.0 && (has_xt || has_decay || has_dephase) {
                    lw.interval(*duration_ns, has_xt);
                }
            }
            Moment::Relabel(order) => {
                lw.flush_all();
                lw.ops.push(Op::Relabel(order.clone()));
            }
            Moment::Measure => {}
        }
    }
    lw.flush_all();

    Ok(Program {
        n,
        ops: group_rotations(lw.ops),
        class_of,
        class_energy,
        class_decay,
        gamma,
        dephase,
        noise: noise.clone(),
    })
}

#[derive(Default)]
struct Scratch {
    class_p: Vec<f64>,
    factors: Vec<Complex64>,
    pops: Vec<f64>,
    norms: Vec<f64>,
}

const PAULIS: [fn() -> Mat2; 4] = [gates::identity, gates::x, gates::y, gates::z];

impl Program {
    fn run<R: Rng + ?Sized>(&self, state: &mut StateVector, rng: &mut R, scratch: &mut Scratch) {
        for op in &self.ops {
            match op {
                Op::Rx { qubit, c, s } => state.apply_rx_like(*qubit, *c, *s),
                Op::RxLayer(rots) => state.apply_rx_layer(rots),
                Op::U1 { qubit, m } => {
                    if is_diagonal(m) {
                        state.apply_1q_diagonal(*qubit, m[0][0], m[1][1]);
                    } else {
                        state.apply_1q_unchecked(*qubit, m);
                    }
                }
                Op::Diag(layer) => layer.apply(state),
                Op::Cnot { control, target } => {
                    state.apply_cnot(*control, *target).expect("validated");
                    let p = self.noise.cnot_depol;
                    if p > 0.0 && rng.random::<f64>() < p {
                        let which = rng.random_range(1..16usize);
                        let (pc, pt) = (which / 4, which % 4);
                        if pc != 0 {
                            state.apply_1q_unchecked(*control, &PAULIS[pc]());
                        }
                        if pt != 0 {
                            state.apply_1q_unchecked(*target, &PAULIS[pt]());
                        }
                    }
                }
                Op::Segment { d_ns, crosstalk, diag } => {
                    self.segment(state, *d_ns, *crosstalk, diag.as_ref(), rng, scratch)
                }
                Op::Relabel(order) => state.permute_qubits(order).expect("validated"),
            }
        }
    }

    fn segment<R: Rng + ?Sized>(
        &self,
        state: &mut StateVector,
        d: f64,
        xt: bool,
        diag: Option<&DiagLayer>,
        rng: &mut R,
        sc: &mut Scratch,
    ) {
        let decays = self.gamma.iter().any(|&g| g > 0.0);
        if !self.class_energy.is_empty() && (decays || xt) {
            let mut remaining = d;
            loop {
                if !decays {
                    self.propagate(state, remaining, xt, 1.0, diag, sc);
                    break;
                }
                self.class_weights(state, sc);
                let survive = |s: f64| -> f64 {
                    sc.class_p
                        .iter()
                        .zip(&self.class_decay)
                        .map(|(p, g)| p * (-g * s).exp())
                        .sum()
                };
                let r: f64 = rng.random();
                let n_all = survive(remaining);
                if n_all >= r {
                    self.propagate(state, remaining, xt, 1.0 / n_all.sqrt(), diag, sc);
                    break;
                }
                let (mut lo, mut hi) = (0.0, remaining);
                while hi - lo > self.noise.dt_noise_ns {
                    let mid = 0.5 * (lo + hi);
                    if survive(mid) >= r {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                self.propagate(state, hi, xt, 1.0 / survive(hi).sqrt(), None, sc);
                self.jump(state, rng, sc);
                remaining -= hi;
                if remaining <= 0.0 {
                    if let Some(layer) = diag {
                        layer.apply(state);
                    }
                    break;
                }
            }
        } else if let Some(layer) = diag {
            layer.apply(state);
        }
        for q in 0..self.n {
            flip_phase(state, q, d, self.dephase[q], rng);
        }
    }

    fn class_weights(&self, state: &StateVector, sc: &mut Scratch) {
        sc.class_p.clear();
        sc.class_p.resize(self.class_energy.len(), 0.0);
        kernels::class_weights(state.amplitudes(), &self.class_of, &mut sc.class_p);
    }

    fn propagate(
        &self,
        state: &mut StateVector,
        s: f64,
        xt: bool,
        scale: f64,
        diag: Option<&DiagLayer>,
        sc: &mut Scratch,
    ) {
        sc.factors.clear();
        sc.factors.extend(self.class_energy.iter().zip(&self.class_decay).map(|(&e, &g)| {
            let phase = if xt { -e * s } else { 0.0 };
            Complex64::from_polar(scale * (-g * s / 2.0).exp(), phase)
        }));
        let amps = state.amplitudes_mut();
        match diag {
            None => kernels::gather_mul(amps, &self.class_of, &sc.factors),
            Some(layer) => kernels::gather_mul_split(amps, &self.class_of, &sc.factors, layer.split, &layer.lo, &layer.hi),
        }
    }

    /// Lowers one qubit, chosen with probability ∝ γ_q · P(q excited).
    fn jump<R: Rng + ?Sized>(&self, state: &mut StateVector, rng: &mut R, sc: &mut Scratch) {
        sc.pops.clear();
        sc.pops.resize(self.n, 0.0);
        kernels::excited_populations(state.amplitudes(), &mut sc.norms, &mut sc.pops);
        let weights: Vec<f64> = (0..self.n).map(|q| self.gamma[q] * sc.pops[q]).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return;
        }
        let mut u = rng.random::<f64>() * total;
        let mut chosen = self.n - 1;
        for (q, w) in weights.iter().enumerate() {
            if u < *w {
                chosen = q;
                break;
            }
            u -= w;
        }
        kernels::lower(state.amplitudes_mut(), chosen, 1.0 / sc.pops[chosen].sqrt());
    }
}

/// Final state of a schedule with every stochastic process off. Idles (and,
/// if asked, gates) accrue crosstalk when a device is given.
pub fn evolve_noiseless(
    schedule: &Schedule,
    device: Option<&DeviceModel>,
    initial: &StateVector,
    crosstalk_during_gates: bool,
) -> Result<StateVector> {
    let noise = NoiseModel {
        crosstalk_during_gates,
        ..NoiseModel::noiseless()
    };
    let program = lower(schedule, device, &noise)?;
    check_initial(&program, initial)?;
    let mut state = initial.clone();
    program.run(&mut state, &mut rng::stream(0, 0, 0), &mut Scratch::default());
    Ok(state)
}

fn check_initial(program: &Program, initial: &StateVector) -> Result<()> {
    if initial.n_qubits() != program.n {
        return Err(Error::Schedule(format!(
            "initial state has {} qubits, schedule {}",
            initial.n_qubits(),
            program.n
        )));
    }
    Ok(())
}

/// Runs `n_runs` trajectories from `|0…0⟩` and measures each once.
pub fn run_trajectories(
    schedule: &Schedule,
    device: Option<&DeviceModel>,
    noise: &NoiseModel,
    n_runs: usize,
    master_seed: u64,
) -> Result<RunResult> {
    let initial = StateVector::new_basis_state(schedule.n_qubits, 0)?;
    run_trajectories_from(schedule, device, noise, &initial, n_runs, master_seed)
}

pub fn run_trajectories_from(
    schedule: &Schedule,
    device: Option<&DeviceModel>,
    noise: &NoiseModel,
    initial: &StateVector,
    n_runs: usize,
    master_seed: u64,
) -> Result<RunResult> {
    if n_runs == 0 {
        return Err(Error::invalid("n_runs must be at least 1"));
    }
    let program = lower(schedule, device, noise)?;
    check_initial(&program, initial)?;
    let n = program.n;
    let flip = noise.readout_flip;

    let measure = |state: &StateVector, r: usize| -> u64 {
        let sampler = Sampler::new(state.amplitudes());
        let mut mrng = rng::stream(master_seed, r as u64, rng::MEASURE);
        let mut b = sampler.draw(&mut mrng);
        if flip > 0.0 {
            for q in 0..n {
                if mrng.random::<f64>() < flip {
                    b ^= 1 << q;
                }
            }
        }
        b
    };

    let bitstrings = if !noise.is_stochastic() {
        let mut state = initial.clone();
        program.run(&mut state, &mut rng::stream(0, 0, 0), &mut Scratch::default());
        let sampler = Sampler::new(state.amplitudes());
        (0..n_runs)
            .into_par_iter()
            .map(|r| sampler.draw(&mut rng::stream(master_seed, r as u64, rng::MEASURE)))
            .collect()
    } else {
        trajectories(&program, initial, n_runs, master_seed, |s, r| measure(s, r))
    };
    Ok(RunResult {
        n_qubits: n,
        bitstrings,
        master_seed,
        total_phys_time_ns: schedule.total_phys_time_ns(),
    })
}

/// Evaluates `observe` on the final state of each trajectory, in run order.
pub fn run_observed<T: Send>(
    schedule: &Schedule,
    device: Option<&DeviceModel>,
    noise: &NoiseModel,
    initial: &StateVector,
    n_runs: usize,
    master_seed: u64,
    observe: impl Fn(&StateVector) -> T + Sync,
) -> Result<Vec<T>> {
    let program = lower(schedule, device, noise)?;
    check_initial(&program, initial)?;
    Ok(trajectories(&program, initial, n_runs, master_seed, |s, _| observe(s)))
}

fn trajectories<T: Send>(
    program: &Program,
    initial: &StateVector,
    n_runs: usize,
    master_seed: u64,
    finish: impl Fn(&StateVector, usize) -> T + Sync,
) -> Vec<T> {
    (0..n_runs)
        .into_par_iter()
        .map_init(
            || (Scratch::default(), initial.clone()),
            |(scratch, state), r| {
                state.amplitudes_mut().copy_from_slice(initial.amplitudes());
                let mut nrng: ChaCha8Rng = rng::stream(master_seed, r as u64, rng::NOISE);
                program.run(state, &mut nrng, scratch);
                finish(state, r)
            },
        )
        .collect()
}


/// Dense matrix of the noiseless action, column by column (small registers).
pub fn schedule_operator(
    schedule: &Schedule,
    device: Option<&DeviceModel>,
    crosstalk_during_gates: bool,
) -> Result<nalgebra::DMatrix<Complex64>> {
    let n = schedule.n_qubits;
    if n > crate::statevector::MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            max: crate::statevector::MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut u = nalgebra::DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let out = evolve_noiseless(
            schedule,
            device,
            &StateVector::new_basis_state(n, col)?,
            crosstalk_during_gates,
        )?;
        for (row, a) in out.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
