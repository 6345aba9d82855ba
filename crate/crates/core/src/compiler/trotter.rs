//! Trotterized TFIM evolution on both backends.

use std::collections::BTreeSet;

use super::{Gate1, GateOp, Moment, Schedule};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::model::{build_scaled, map_time, FieldRule, SpinModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitOrder {
    /// Field, disorder, then coupling layer per step.
    #[default]
    First,
    /// Symmetric splitting with half-step field layers on both sides.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trotter {
    pub steps: usize,
    pub order: SplitOrder,
}

impl From<usize> for Trotter {
    fn from(steps: usize) -> Self {
        Self {
            steps,
            order: SplitOrder::First,
        }
    }
}

struct Timing {
    single_ns: f64,
    cnot_ns: f64,
}

impl Timing {
    fn of(device: Option<&DeviceModel>) -> Self {
        match device {
            Some(d) => Self {
                single_ns: d.gates().single_ns,
                cnot_ns: d.gates().cnot_ns,
            },
            None => Self {
                single_ns: 0.0,
                cnot_ns: 0.0,
            },
        }
    }
}

fn check(t: f64, trotter: Trotter) -> Result<()> {
    if trotter.steps == 0 {
        return Err(Error::invalid("need at least one Trotter step"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("bad evolution time {t}")));
    }
    Ok(())
}

/// `exp(+i h dt X)` on every spin with a field.
fn field_layer(s: &mut Schedule, model: &SpinModel, dt: f64, timing: &Timing) {
    let ops = model
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0.0)
        .map(|(q, &h)| GateOp::One {
            qubit: q,
            gate: Gate1::Rx(-2.0 * h * dt),
            duration_ns: timing.single_ns,
        })
        .collect();
    s.push_gates(ops);
}

/// `exp(+i ε dt Z)`.
fn disorder_layer(s: &mut Schedule, model: &SpinModel, dt: f64) {
    let ops = model
        .disorder()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0.0)
        .map(|(q, &e)| GateOp::One {
            qubit: q,
            gate: Gate1::Rz(-2.0 * e * dt),
            duration_ns: 0.0,
        })
        .collect();
    s.push_gates(ops);
}

/// Greedy partition of the edges into layers of disjoint pairs.
fn edge_layers(model: &SpinModel) -> Vec<Vec<(usize, usize, f64)>> {
    let mut layers: Vec<(BTreeSet<usize>, Vec<(usize, usize, f64)>)> = Vec::new();
    for (a, b, j) in model.couplings() {
        match layers.iter_mut().find(|(used, _)| !used.contains(&a) && !used.contains(&b)) {
            Some((used, edges)) => {
                used.extend([a, b]);
                edges.push((a, b, j));
            }
            None => layers.push((BTreeSet::from([a, b]), vec![(a, b, j)])),
        }
    }
    layers.into_iter().map(|(_, e)| e).collect()
}

/// `exp(+i J dt Z_a Z_b)` on every edge as CNOT · Rz · CNOT.
fn zz_gate_layer(s: &mut Schedule, layers: &[Vec<(usize, usize, f64)>], dt: f64, timing: &Timing) {
    for layer in layers {
        let cnots: Vec<GateOp> = layer
            .iter()
            .map(|&(a, b, _)| GateOp::Cnot {
                control: a,
                target: b,
                duration_ns: timing.cnot_ns,
            })
            .collect();
        s.push_gates(cnots.clone());
        s.push_gates(
            layer
                .iter()
                .map(|&(_, b, j)| GateOp::One {
                    qubit: b,
                    gate: Gate1::Rz(-2.0 * j * dt),
                    duration_ns: 0.0,
                })
                .collect(),
        );
        s.push_gates(cnots);
    }
}

fn build(
    model: &SpinModel,
    t: f64,
    trotter: Trotter,
    timing: &Timing,
    mut coupling_layer: impl FnMut(&mut Schedule, f64),
) -> Schedule {
    let n = model.n_spins();
    let mut s = Schedule::new(n, model.device_qubits().map(<[usize]>::to_vec));
    let dt = t / trotter.steps as f64;
    for _ in 0..trotter.steps {
        match trotter.order {
            SplitOrder::First => {
                field_layer(&mut s, model, dt, timing);
                disorder_layer(&mut s, model, dt);
                coupling_layer(&mut s, dt);
            }
            SplitOrder::Second => {
                field_layer(&mut s, model, dt / 2.0, timing);
                disorder_layer(&mut s, model, dt / 2.0);
                coupling_layer(&mut s, dt);
                disorder_layer(&mut s, model, dt / 2.0);
                field_layer(&mut s, model, dt / 2.0, timing);
            }
        }
    }
    s.push(Moment::Measure);
    s
}

/// Gate-based lowering. With a device, gates carry its durations; without
/// one every duration is zero.
pub fn trotterize_digital(
    model: &SpinModel,
    t: f64,
    trotter: impl Into<Trotter>,
    device: Option<&DeviceModel>,
) -> Result<Schedule> {
    let trotter = trotter.into();
    check(t, trotter)?;
    let timing = Timing::of(device);
    let layers = edge_layers(model);
    Ok(build(model, t, trotter, &timing, |s, dt| zz_gate_layer(s, &layers, dt, &timing)))
}

/// Idle-based lowering: each coupling layer is one idle of `t_phys / steps`
/// during which every device coupling acts at once.
pub fn trotterize_da(
    model: &SpinModel,
    device: &DeviceModel,
    t: f64,
    trotter: impl Into<Trotter>,
) -> Result<Schedule> {
    let trotter = trotter.into();
    check(t, trotter)?;
    let tm = model.check_device_consistent(device)?;
    map_time(t, tm)?;
    let timing = Timing::of(Some(device));
    Ok(build(model, t, trotter, &timing, |s, dt| s.push_idle(dt * tm.scale_us() * 1e3)))
}

/// Active qubits followed by their device neighbors in ascending order.
pub fn closure_qubits(device: &DeviceModel, active: &[usize]) -> Result<Vec<usize>> {
    if active.is_empty() {
        return Err(Error::invalid("empty active set"));
    }
    let mut out = active.to_vec();
    let mut extra = BTreeSet::new();
    for &q in active {
        if q >= device.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: device.n_qubits(),
            });
        }
        extra.extend(device.neighbors(q));
    }
    out.extend(extra.into_iter().filter(|q| !active.contains(q)));
    Ok(out)
}

/// Grows a device-derived model to include every neighbor of its spins.
/// Spectators carry no field or disorder; all couplings among the enlarged
/// set are kept, on the model's own time scale.
pub fn spectator_closure(model: &SpinModel, device: &DeviceModel) -> Result<SpinModel> {
    let (Some(active), Some(tm)) = (model.device_qubits(), model.time_map()) else {
        return Err(Error::Config("spectator closure needs a device-derived model".into()));
    };
    let qubits = closure_qubits(device, active)?;
    let pad = |v: &[f64]| {
        let mut out = v.to_vec();
        out.resize(qubits.len(), 0.0);
        out
    };
    build_scaled(
        device,
        &qubits,
        &FieldRule::Explicit(pad(model.fields())),
        Some(pad(model.disorder())),
        tm,
    )
}
