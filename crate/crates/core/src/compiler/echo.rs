//! Echo-isolated ZZ rotations and the quantum Fourier transform.

use std::f64::consts::PI;

use super::{Gate1, GateOp, Moment, Schedule};
use crate::device::{DeviceModel, KHZ_US};
use crate::error::{Error, Result};

fn one(qubit: usize, gate: Gate1, duration_ns: f64) -> GateOp {
    GateOp::One { qubit, gate, duration_ns }
}

/// `exp(−i θ Z_i Z_j)` from idling under crosstalk, with a π pulse on the
/// spectator halfway through so its couplings to `i` and `j` cancel. The
/// idle warns when longer than the smallest T2 of the three qubits.
pub fn echo_zz_isolation(device: &DeviceModel, pair: (usize, usize), spectator: usize, theta: f64) -> Result<Schedule> {
    let limit_ns = [pair.0, pair.1, spectator]
        .iter()
        .filter_map(|&q| device.qubit(q))
        .map(|q| q.t2_us * 1e3)
        .fold(f64::INFINITY, f64::min);
    echo_zz_isolation_with_limit(device, pair, spectator, theta, limit_ns)
}

/// As [`echo_zz_isolation`] with an explicit idle limit in ns.
///
/// The fragment acts on local qubits `0, 1, 2` = `(i, j, spectator)`. Idling
/// for τ gives `exp(+i J τ Z_i Z_j)`, so τ = |θ|/J and a positive θ is
/// reached by conjugating with X on `i`.
pub fn echo_zz_isolation_with_limit(
    device: &DeviceModel,
    pair: (usize, usize),
    spectator: usize,
    theta: f64,
    max_idle_ns: f64,
) -> Result<Schedule> {
    let (i, j) = pair;
    let n = device.n_qubits();
    for q in [i, j, spectator] {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
        }
    }
    if i == j || spectator == i || spectator == j {
        return Err(Error::invalid("echo needs three distinct qubits"));
    }
    if !theta.is_finite() {
        return Err(Error::invalid("non-finite angle"));
    }
    let j_khz = device
        .coupling(i, j)
        .ok_or_else(|| Error::invalid(format!("qubits {i} and {j} are not coupled")))?;

    let mut s = Schedule::new(3, Some(vec![i, j, spectator]));
    if theta == 0.0 {
        return Ok(s);
    }
    let tau_ns = theta.abs() / (j_khz * KHZ_US) * 1e3;
    if tau_ns > max_idle_ns {
        log::warn!("echo idle of {tau_ns:.0} ns exceeds the {max_idle_ns:.0} ns limit");
    }
    let x_ns = device.gates().single_ns;
    let wrap = theta > 0.0;
    if wrap {
        s.push_gates(vec![one(0, Gate1::X, x_ns)]);
    }
    s.push_idle(tau_ns / 2.0);
    s.push_gates(vec![one(2, Gate1::X, x_ns)]);
    s.push_idle(tau_ns / 2.0);
    s.push_gates(vec![one(2, Gate1::X, x_ns)]);
    if wrap {
        s.push_gates(vec![one(0, Gate1::X, x_ns)]);
    }
    Ok(s)
}

/// Control/target pairs of the textbook ladder with their phase angles,
/// for the most significant qubit first.
fn ladder(n: usize) -> Vec<Step> {
    let mut out = Vec::new();
    for target in (0..n).rev() {
        out.push(Step::H(target));
        for control in (0..target).rev() {
            out.push(Step::CPhase {
                control,
                target,
                phi: PI / (1u64 << (target - control)) as f64,
            });
        }
    }
    out
}

enum Step {
    H(usize),
    CPhase { control: usize, target: usize, phi: f64 },
}

fn reversal(n: usize) -> Moment {
    Moment::Relabel((0..n).rev().collect())
}

/// QFT with controlled phases from two CNOTs and phase gates. A device and
/// qubit list attach timing and placement.
pub fn qft_digital(n_qubits: usize, placement: Option<(&DeviceModel, &[usize])>) -> Result<Schedule> {
    if n_qubits == 0 {
        return Err(Error::invalid("QFT needs at least one qubit"));
    }
    let (single, cnot, dq) = match placement {
        Some((d, qubits)) => {
            if qubits.len() != n_qubits {
                return Err(Error::invalid("placement length differs from qubit count"));
            }
            (d.gates().single_ns, d.gates().cnot_ns, Some(qubits.to_vec()))
        }
        None => (0.0, 0.0, None),
    };
    let mut s = Schedule::new(n_qubits, dq);
    for step in ladder(n_qubits) {
        match step {
            Step::H(q) => s.push_gates(vec![one(q, Gate1::H, single)]),
            Step::CPhase { control, target, phi } => {
                let cx = GateOp::Cnot { control, target, duration_ns: cnot };
                s.push_gates(vec![one(control, Gate1::Phase(phi / 2.0), 0.0)]);
                s.push_gates(vec![cx]);
                s.push_gates(vec![one(target, Gate1::Phase(-phi / 2.0), 0.0)]);
                s.push_gates(vec![cx]);
                s.push_gates(vec![one(target, Gate1::Phase(phi / 2.0), 0.0)]);
            }
        }
    }
    if n_qubits > 1 {
        s.push(reversal(n_qubits));
    }
    s.push(Moment::Measure);
    Ok(s)
}

/// Three-qubit QFT where each controlled phase is an echo-isolated idle plus
/// virtual z rotations; equal to [`qft_digital`] up to global phase.
///
/// `diag(1,1,1,e^{iφ}) = e^{iφ/4} · exp(+iφ/4 Z_c Z_t) · Rz_c(φ/2) · Rz_t(φ/2)`.
pub fn qft_da(device: &DeviceModel, qubits: [usize; 3]) -> Result<Schedule> {
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        if device.coupling(qubits[a], qubits[b]).is_none() {
            return Err(Error::Config(format!(
                "qubits {} and {} are not coupled",
                qubits[a], qubits[b]
            )));
        }
    }
    let single = device.gates().single_ns;
    let mut s = Schedule::new(3, Some(qubits.to_vec()));
    for step in ladder(3) {
        match step {
            Step::H(q) => s.push_gates(vec![one(q, Gate1::H, single)]),
            Step::CPhase { control, target, phi } => {
                let spectator = 3 - control - target;
                let frag = echo_zz_isolation(
                    device,
                    (qubits[control], qubits[target]),
                    qubits[spectator],
                    -phi / 4.0,
                )?;
                s.append_mapped(&frag)?;
                s.push_gates(vec![
                    one(control, Gate1::Rz(phi / 2.0), 0.0),
                    one(target, Gate1::Rz(phi / 2.0), 0.0),
                ]);
            }
        }
    }
    s.push(reversal(3));
    s.push(Moment::Measure);
    Ok(s)
}
