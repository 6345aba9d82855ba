//! Line-oriented schedule format.
//!
//! ```text
//! QUBITS 2 DEVICE 0 1
//! RX 0 -0.5 50 ; RX 1 -0.5 50
//! IDLE 8333.3
//! CNOT 0 1 300
//! RELABEL 1 0
//! MEASURE
//! ```
//!
//! Parallel gates share a line, separated by `;`. Numbers use Rust's shortest
//! round-trip formatting so parsing restores the exact values.

use std::fmt::Write as _;

use super::{Gate1, GateOp, Moment, Schedule};
use crate::error::{Error, Result};

pub fn write_schedule(s: &Schedule) -> String {
    let mut out = format!("QUBITS {}", s.n_qubits);
    if let Some(dq) = &s.device_qubits {
        out.push_str(" DEVICE");
        for q in dq {
            write!(out, " {q}").unwrap();
        }
    }
    out.push('\n');
    for m in &s.moments {
        match m {
            Moment::Gates(ops) => {
                let parts: Vec<String> = ops.iter().map(write_op).collect();
                out.push_str(&parts.join(" ; "));
            }
            Moment::Idle { duration_ns } => write!(out, "IDLE {duration_ns}").unwrap(),
            Moment::Relabel(order) => {
                out.push_str("RELABEL");
                for q in order {
                    write!(out, " {q}").unwrap();
                }
            }
            Moment::Measure => out.push_str("MEASURE"),
        }
        out.push('\n');
    }
    out
}

fn write_op(op: &GateOp) -> String {
    match *op {
        GateOp::One { qubit, gate, duration_ns: d } => match gate {
            Gate1::Rx(a) => format!("RX {qubit} {a} {d}"),
            Gate1::Rz(a) => format!("RZ {qubit} {a} {d}"),
            Gate1::Phase(a) => format!("P {qubit} {a} {d}"),
            Gate1::X => format!("X {qubit} {d}"),
            Gate1::H => format!("H {qubit} {d}"),
        },
        GateOp::Cnot { control, target, duration_ns } => format!("CNOT {control} {target} {duration_ns}"),
    }
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty schedule".into()))?;
    let err = |ln: usize, msg: &str| Error::Parse(format!("line {ln}: {msg}"));

    let words: Vec<&str> = header.split_whitespace().collect();
    if words.len() < 2 || words[0] != "QUBITS" {
        return Err(err(ln, "expected `QUBITS n`"));
    }
    let n_qubits = words[1].parse().map_err(|_| err(ln, "bad qubit count"))?;
    let device_qubits = match words.get(2) {
        None => None,
        Some(&"DEVICE") => Some(
            words[3..]
                .iter()
                .map(|w| w.parse().map_err(|_| err(ln, "bad device qubit")))
                .collect::<Result<Vec<usize>>>()?,
        ),
        Some(_) => return Err(err(ln, "expected DEVICE")),
    };
    let mut s = Schedule::new(n_qubits, device_qubits);

    for (ln, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        let moment = match words[0] {
            "IDLE" if words.len() == 2 => Moment::Idle {
                duration_ns: words[1].parse().map_err(|_| err(ln, "bad duration"))?,
            },
            "RELABEL" => Moment::Relabel(
                words[1..]
                    .iter()
                    .map(|w| w.parse().map_err(|_| err(ln, "bad index")))
                    .collect::<Result<_>>()?,
            ),
            "MEASURE" if words.len() == 1 => Moment::Measure,
            _ => Moment::Gates(
                line.split(';')
                    .map(|part| parse_op(part).map_err(|m| err(ln, &m)))
                    .collect::<Result<_>>()?,
            ),
        };
        s.moments.push(moment);
    }
    s.validate()?;
    Ok(s)
}

fn parse_op(part: &str) -> std::result::Result<GateOp, String> {
    let w: Vec<&str> = part.split_whitespace().collect();
    let num = |i: usize| -> std::result::Result<f64, String> {
        w.get(i)
            .ok_or_else(|| format!("`{part}` is missing a field"))?
            .parse()
            .map_err(|_| format!("bad number in `{part}`"))
    };
    let idx = |i: usize| -> std::result::Result<usize, String> {
        w.get(i)
            .ok_or_else(|| format!("`{part}` is missing a field"))?
            .parse()
            .map_err(|_| format!("bad index in `{part}`"))
    };
    let arity = |n: usize| if w.len() == n { Ok(()) } else { Err(format!("wrong field count in `{part}`")) };
    let one = |gate, d| -> std::result::Result<GateOp, String> {
        Ok(GateOp::One { qubit: idx(1)?, gate, duration_ns: d })
    };
    match w.first().copied() {
        Some("RX") => { arity(4)?; one(Gate1::Rx(num(2)?), num(3)?) }
        Some("RZ") => { arity(4)?; one(Gate1::Rz(num(2)?), num(3)?) }
        Some("P") => { arity(4)?; one(Gate1::Phase(num(2)?), num(3)?) }
        Some("X") => { arity(3)?; one(Gate1::X, num(2)?) }
        Some("H") => { arity(3)?; one(Gate1::H, num(2)?) }
        Some("CNOT") => {
            arity(4)?;
            Ok(GateOp::Cnot { control: idx(1)?, target: idx(2)?, duration_ns: num(3)? })
        }
        _ => Err(format!("unknown instruction `{part}`")),
    }
}
