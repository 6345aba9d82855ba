//! Schedules: ordered moments of parallel gates, timed idles, relabels and a
//! final measurement, plus the lowerings that produce them.

mod echo;
mod text;
mod trotter;


pub use echo::{echo_zz_isolation, echo_zz_isolation_with_limit, qft_da, qft_digital};
pub use text::{parse_schedule, write_schedule};
pub use trotter::{spectator_closure, trotterize_da, trotterize_digital, SplitOrder, Trotter};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::statevector::{check_permutation, gates, Mat2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate1 {
    Rx(f64),
    Rz(f64),
    /// `diag(1, e^{iλ})`.
    Phase(f64),
    X,
    H,
}

impl Gate1 {
    pub fn matrix(&self) -> Mat2 {
        match *self {
            Gate1::Rx(t) => gates::rx(t),
            Gate1::Rz(t) => gates::rz(t),
            Gate1::Phase(l) => gates::phase(l),
            Gate1::X => gates::x(),
            Gate1::H => gates::h(),
        }
    }

    /// Diagonal gates are frame changes and take no time.
    pub fn is_virtual(&self) -> bool {
        matches!(self, Gate1::Rz(_) | Gate1::Phase(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    One { qubit: usize, gate: Gate1, duration_ns: f64 },
    Cnot { control: usize, target: usize, duration_ns: f64 },
}

impl GateOp {
    pub fn duration_ns(&self) -> f64 {
        match *self {
            GateOp::One { duration_ns, .. } | GateOp::Cnot { duration_ns, .. } => duration_ns,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::One { qubit, .. } => vec![qubit],
            GateOp::Cnot { control, target, .. } => vec![control, target],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Moment {
    /// Gates on disjoint qubits, applied together.
    Gates(Vec<GateOp>),
    Idle { duration_ns: f64 },
    /// Exact, free relabeling: new qubit `q` holds what was on `order[q]`.
    /// Only measurements may follow.
    Relabel(Vec<usize>),
    Measure,
}

impl Moment {
    pub fn duration_ns(&self) -> f64 {
        match self {
            Moment::Gates(ops) => ops.iter().map(GateOp::duration_ns).fold(0.0, f64::max),
            Moment::Idle { duration_ns } => *duration_ns,
            Moment::Relabel(_) | Moment::Measure => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub n_qubits: usize,
    /// Device qubit behind each local qubit, when the schedule targets a device.
    pub device_qubits: Option<Vec<usize>>,
    pub moments: Vec<Moment>,
}

impl Schedule {
    pub fn new(n_qubits: usize, device_qubits: Option<Vec<usize>>) -> Self {
        Self {
            n_qubits,
            device_qubits,
            moments: Vec::new(),
        }
    }

    pub fn total_phys_time_ns(&self) -> f64 {
        self.moments.iter().map(Moment::duration_ns).sum()
    }

    pub fn push(&mut self, m: Moment) {
        self.moments.push(m);
    }

    pub fn push_gates(&mut self, ops: Vec<GateOp>) {
        if !ops.is_empty() {
            self.moments.push(Moment::Gates(ops));
        }
    }

    pub fn push_idle(&mut self, duration_ns: f64) {
        if duration_ns > 0.0 {
            self.moments.push(Moment::Idle { duration_ns });
        }
    }

    pub fn n_cnots(&self) -> usize {
        self.moments
            .iter()
            .map(|m| match m {
                Moment::Gates(ops) => ops.iter().filter(|o| matches!(o, GateOp::Cnot { .. })).count(),
                _ => 0,
            })
            .sum()
    }

    /// Appends a fragment whose device qubits all appear in this schedule.
    pub fn append_mapped(&mut self, fragment: &Schedule) -> Result<()> {
        let (Some(mine), Some(theirs)) = (&self.device_qubits, &fragment.device_qubits) else {
            return Err(Error::Schedule("both schedules need device qubits".into()));
        };
        let map: Vec<usize> = theirs
            .iter()
            .map(|d| {
                mine.iter()
                    .position(|m| m == d)
                    .ok_or_else(|| Error::Schedule(format!("device qubit {d} not in target schedule")))
            })
            .collect::<Result<_>>()?;
        for m in &fragment.moments {
            let moved = match m {
                Moment::Gates(ops) => Moment::Gates(
                    ops.iter()
                        .map(|op| match *op {
                            GateOp::One { qubit, gate, duration_ns } => GateOp::One {
                                qubit: map[qubit],
                                gate,
                                duration_ns,
                            },
                            GateOp::Cnot { control, target, duration_ns } => GateOp::Cnot {
                                control: map[control],
                                target: map[target],
                                duration_ns,
                            },
                        })
                        .collect(),
                ),
                Moment::Idle { duration_ns } => Moment::Idle { duration_ns: *duration_ns },
                Moment::Relabel(_) | Moment::Measure => {
                    return Err(Error::Schedule("fragment must not relabel or measure".into()))
                }
            };
            self.moments.push(moved);
        }
        Ok(())
    }

    /// Structural checks: indices, disjointness, durations, and that nothing
    /// but measurement follows a relabel and nothing follows a measurement.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::Schedule("schedule has no qubits".into()));
        }
        if let Some(dq) = &self.device_qubits {
            if dq.len() != n {
                return Err(Error::Schedule(format!("{} device qubits for {n} local qubits", dq.len())));
            }
            if dq.iter().collect::<BTreeSet<_>>().len() != n {
                return Err(Error::Schedule("device qubits repeat".into()));
            }
        }
        let mut relabeled = false;
        for (idx, m) in self.moments.iter().enumerate() {
            let at = |msg: String| Error::Schedule(format!("moment {idx}: {msg}"));
            if idx + 1 < self.moments.len() && matches!(m, Moment::Measure) {
                return Err(at("measurement must be last".into()));
            }
            match m {
                Moment::Gates(ops) => {
                    if relabeled {
                        return Err(at("gate after relabel".into()));
                    }
                    if ops.is_empty() {
                        return Err(at("empty gate layer".into()));
                    }
                    let mut used = BTreeSet::new();
                    for op in ops {
                        let d = op.duration_ns();
                        if !(d.is_finite() && d >= 0.0) {
                            return Err(at(format!("bad duration {d}")));
                        }
                        if let GateOp::One { gate: Gate1::Rx(a) | Gate1::Rz(a) | Gate1::Phase(a), .. } = op {
                            if !a.is_finite() {
                                return Err(at("non-finite angle".into()));
                            }
                        }
                        for q in op.qubits() {
                            if q >= n {
                                return Err(at(format!("qubit {q} out of range")));
                            }
                            if !used.insert(q) {
                                return Err(at(format!("qubit {q} used twice")));
                            }
                        }
                    }
                }
                Moment::Idle { duration_ns } => {
                    if relabeled {
                        return Err(at("idle after relabel".into()));
                    }
                    if !(duration_ns.is_finite() && *duration_ns >= 0.0) {
                        return Err(at(format!("bad idle {duration_ns}")));
                    }
                }
                Moment::Relabel(order) => {
                    check_permutation(order, n).map_err(|e| at(e.to_string()))?;
                    relabeled = true;
                }
                Moment::Measure => {}
            }
        }
        Ok(())
    }
}
