use super::{Circuit, GateOp, Instruction, NoiseOp, Topology};
use serde::Serialize;
use std::fmt;

/// A structural problem found by [`validate`]. Violations are data: a circuit
/// may carry several and the caller decides what to do with them.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    QubitOutOfRange { instruction: usize, qubit: usize },
    CbitOutOfRange { instruction: usize, cbit: usize },
    WrongArity { instruction: usize, gate: &'static str, expected: usize, got: usize },
    RepeatedQubit { instruction: usize, qubit: usize },
    NonAdjacentPair { instruction: usize, a: usize, b: usize },
    UnwrittenBit { instruction: usize, cbit: usize },
    InvalidParameter { instruction: usize, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::QubitOutOfRange { instruction, qubit } => {
                write!(f, "instruction {instruction}: qubit {qubit} out of range")
            }
            Violation::CbitOutOfRange { instruction, cbit } => {
                write!(f, "instruction {instruction}: classical bit c{cbit} out of range")
            }
            Violation::WrongArity { instruction, gate, expected, got } => {
                write!(f, "instruction {instruction}: {gate} expects {expected} qubits, got {got}")
            }
            Violation::RepeatedQubit { instruction, qubit } => {
                write!(f, "instruction {instruction}: qubit {qubit} used twice")
            }
            Violation::NonAdjacentPair { instruction, a, b } => {
                write!(f, "instruction {instruction}: qubits {a} and {b} are not coupled")
            }
            Violation::UnwrittenBit { instruction, cbit } => {
                write!(f, "instruction {instruction}: condition reads c{cbit} before it is written")
            }
            Violation::InvalidParameter { instruction, detail } => {
                write!(f, "instruction {instruction}: {detail}")
            }
        }
    }
}

/// Checks index ranges, gate arity, conditional bit provenance and, when a
/// topology is supplied (or attached to the circuit), coupling of every
/// two-qubit gate.
pub fn validate(circuit: &Circuit, topology: Option<&Topology>) -> Vec<Violation> {
    let topology = topology.or(circuit.topology.as_ref());
    let mut out = Vec::new();
    let mut written = vec![false; circuit.num_cbits];
    let nq = circuit.num_qubits;

    let check_qubit = |i: usize, q: usize, out: &mut Vec<Violation>| {
        if q >= nq {
            out.push(Violation::QubitOutOfRange { instruction: i, qubit: q });
            false
        } else {
            true
        }
    };
    let check_cbit = |i: usize, c: usize, out: &mut Vec<Violation>| {
        if c >= circuit.num_cbits {
            out.push(Violation::CbitOutOfRange { instruction: i, cbit: c });
            false
        } else {
            true
        }
    };
    let check_gate = |i: usize, op: &GateOp, out: &mut Vec<Violation>| {
        let expected = op.gate.arity();
        if op.qubits.len() != expected {
            out.push(Violation::WrongArity { instruction: i, gate: op.gate.name(), expected, got: op.qubits.len() });
            return;
        }
        let in_range = op.qubits.iter().all(|&q| check_qubit(i, q, out));
        if expected == 2 && op.qubits[0] == op.qubits[1] {
            out.push(Violation::RepeatedQubit { instruction: i, qubit: op.qubits[0] });
            return;
        }
        if in_range && expected == 2 {
            if let Some(t) = topology {
                if !t.adjacent(op.qubits[0], op.qubits[1]) {
                    out.push(Violation::NonAdjacentPair { instruction: i, a: op.qubits[0], b: op.qubits[1] });
                }
            }
        }
    };
    let check_prob = |i: usize, p: f64, what: &str, out: &mut Vec<Violation>| {
        if !(0.0..=1.0).contains(&p) {
            out.push(Violation::InvalidParameter { instruction: i, detail: format!("{what} = {p} outside [0, 1]") });
        }
    };

    for (i, inst) in circuit.instructions.iter().enumerate() {
        match inst {
            Instruction::Gate(op) => check_gate(i, op, &mut out),
            Instruction::Measure { qubit, cbit, .. } => {
                check_qubit(i, *qubit, &mut out);
                if check_cbit(i, *cbit, &mut out) {
                    written[*cbit] = true;
                }
            }
            Instruction::Reset { qubit } => {
                check_qubit(i, *qubit, &mut out);
            }
            Instruction::Delay { qubit, duration_ns } => {
                check_qubit(i, *qubit, &mut out);
                if !(duration_ns.is_finite() && *duration_ns >= 0.0) {
                    out.push(Violation::InvalidParameter {
                        instruction: i,
                        detail: format!("delay duration {duration_ns} ns"),
                    });
                }
            }
            Instruction::Conditional { cond, ops } => {
                for b in cond.bits() {
                    if b >= circuit.num_cbits {
                        out.push(Violation::CbitOutOfRange { instruction: i, cbit: b });
                    } else if !written[b] {
                        out.push(Violation::UnwrittenBit { instruction: i, cbit: b });
                    }
                }
                for op in ops {
                    check_gate(i, op, &mut out);
                }
            }
            Instruction::Barrier { qubits } => {
                for &q in qubits {
                    check_qubit(i, q, &mut out);
                }
            }
            Instruction::Noise(n) => match n {
                NoiseOp::Idle { qubit, duration_ns, t1_us, tphi_us } => {
                    check_qubit(i, *qubit, &mut out);
                    if !(*duration_ns >= 0.0 && *t1_us > 0.0 && *tphi_us > 0.0) {
                        out.push(Violation::InvalidParameter {
                            instruction: i,
                            detail: "idle channel needs t >= 0 and positive T1/Tphi".into(),
                        });
                    }
                }
                NoiseOp::PhaseFlip { qubit, p } => {
                    check_qubit(i, *qubit, &mut out);
                    check_prob(i, *p, "phase-flip probability", &mut out);
                }
                NoiseOp::Depolarize { qubits, p } => {
                    for &q in qubits {
                        check_qubit(i, q, &mut out);
                    }
                    check_prob(i, *p, "depolarizing probability", &mut out);
                }
                NoiseOp::ReadoutError { cbit, p00, p11 } => {
                    check_cbit(i, *cbit, &mut out);
                    check_prob(i, *p00, "p00", &mut out);
                    check_prob(i, *p11, "p11", &mut out);
                }
            },
        }
    }
    out
}
