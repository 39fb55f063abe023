//! Adaptive-circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over `num_qubits`
//! qubits and `num_cbits` classical bits. Besides unitary gates it carries
//! mid-circuit measurements that write classical bits, conditional blocks
//! gated on boolean expressions over those bits, resets, delays, barriers,
//! and (after noise decoration) explicit noise operations.
//!
//! Conventions used throughout the crate:
//! - qubit 0 is the least-significant bit of basis-state indices;
//! - bitstrings are printed with qubit (or classical bit) 0 leftmost.

mod cond;
mod depth;
mod lower;
mod schedule;
mod text;
mod validate;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

pub use cond::{CondExpr, CondError};
pub use depth::depth;
pub use lower::lower;
pub use schedule::{schedule, Activity, Interval, Schedule, ScheduleError, Timeline};
pub use text::{parse_text, to_text, ParseError};
pub use validate::{validate, Violation};

/// Single- and two-qubit gate kinds. Rotation angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "theta")]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "SDG",
            Gate::Rx(_) => "RX",
            Gate::Ry(_) => "RY",
            Gate::Rz(_) => "RZ",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
        }
    }

    /// True when the gate maps Paulis to Paulis. Rotations qualify only at
    /// multiples of pi/2.
    pub fn is_clifford(&self) -> bool {
        match self {
            Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) => quarter_turns(*t).is_some(),
            _ => true,
        }
    }
}

/// Number of quarter turns (mod 4) when `theta` is a multiple of pi/2.
pub(crate) fn quarter_turns(theta: f64) -> Option<u8> {
    let k = theta / FRAC_PI_2;
    let r = k.round();
    if (k - r).abs() < 1e-12 {
        Some(r.rem_euclid(4.0) as u8)
    } else {
        None
    }
}

/// A gate bound to the qubits it acts on. For two-qubit gates the order is
/// `(control, target)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

impl GateOp {
    pub fn new(gate: Gate, qubits: &[usize]) -> Self {
        Self { gate, qubits: qubits.to_vec() }
    }

    pub fn one(gate: Gate, q: usize) -> Self {
        Self { gate, qubits: vec![q] }
    }

    pub fn two(gate: Gate, control: usize, target: usize) -> Self {
        Self { gate, qubits: vec![control, target] }
    }
}

/// Measurement basis of a mid-circuit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

/// Explicit noise operations. These are inserted by noise decoration and
/// interpreted by the engines that support noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum NoiseOp {
    /// Amplitude damping plus pure dephasing over an idle window.
    Idle { qubit: usize, duration_ns: f64, t1_us: f64, tphi_us: f64 },
    /// Phase flip with probability `p`.
    PhaseFlip { qubit: usize, p: f64 },
    /// Uniform Pauli (depolarizing) error with total error probability `p`.
    Depolarize { qubits: Vec<usize>, p: f64 },
    /// Classical readout error on the bit just written by a measurement.
    ReadoutError { cbit: usize, p00: f64, p11: f64 },
}

impl NoiseOp {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            NoiseOp::Idle { qubit, .. } | NoiseOp::PhaseFlip { qubit, .. } => vec![*qubit],
            NoiseOp::Depolarize { qubits, .. } => qubits.clone(),
            NoiseOp::ReadoutError { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instruction {
    Gate(GateOp),
    Measure { qubit: usize, cbit: usize, basis: Basis },
    /// Active reset to |0>: a measurement followed by a conditional X.
    Reset { qubit: usize },
    Delay { qubit: usize, duration_ns: f64 },
    /// Gates applied only when `cond` evaluates to true on the register.
    Conditional { cond: CondExpr, ops: Vec<GateOp> },
    /// Synchronization point; an empty list means every qubit.
    Barrier { qubits: Vec<usize> },
    Noise(NoiseOp),
}

impl Instruction {
    /// Qubits the instruction touches. An empty barrier returns nothing here;
    /// callers that care expand it against the circuit width.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Gate(op) => op.qubits.clone(),
            Instruction::Measure { qubit, .. }
            | Instruction::Reset { qubit }
            | Instruction::Delay { qubit, .. } => vec![*qubit],
            Instruction::Conditional { ops, .. } => {
                let set: BTreeSet<usize> = ops.iter().flat_map(|o| o.qubits.iter().copied()).collect();
                set.into_iter().collect()
            }
            Instruction::Barrier { qubits } => qubits.clone(),
            Instruction::Noise(n) => n.qubits(),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Instruction::Measure { .. } | Instruction::Reset { .. })
    }
}

/// Undirected coupling graph over qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    pub fn new(num_qubits: usize, edges: &[(usize, usize)]) -> Self {
        let mut t = Self { num_qubits, edges: BTreeSet::new() };
        for &(a, b) in edges {
            t.add_edge(a, b);
        }
        t
    }

    pub fn ring(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|q| (q, (q + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn line(n: usize) -> Self {
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        Self::new(n, &edges)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == q { Some(b) } else if b == q { Some(a) } else { None })
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub instructions: Vec<Instruction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_cbits: usize) -> Self {
        Self { num_qubits, num_cbits, instructions: Vec::new(), topology: None }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = Some(topology);
        self
    }

    pub fn push(&mut self, inst: Instruction) -> &mut Self {
        self.instructions.push(inst);
        self
    }

    pub fn gate(&mut self, gate: Gate, qubits: &[usize]) -> &mut Self {
        self.push(Instruction::Gate(GateOp::new(gate, qubits)))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(Gate::H, &[q])
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.gate(Gate::X, &[q])
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.gate(Gate::Cnot, &[control, target])
    }

    pub fn measure(&mut self, qubit: usize, cbit: usize) -> &mut Self {
        self.push(Instruction::Measure { qubit, cbit, basis: Basis::Z })
    }

    pub fn measure_x(&mut self, qubit: usize, cbit: usize) -> &mut Self {
        self.push(Instruction::Measure { qubit, cbit, basis: Basis::X })
    }

    pub fn reset(&mut self, qubit: usize) -> &mut Self {
        self.push(Instruction::Reset { qubit })
    }

    pub fn delay(&mut self, qubit: usize, duration_ns: f64) -> &mut Self {
        self.push(Instruction::Delay { qubit, duration_ns })
    }

    pub fn barrier(&mut self, qubits: &[usize]) -> &mut Self {
        self.push(Instruction::Barrier { qubits: qubits.to_vec() })
    }

    pub fn cond(&mut self, cond: CondExpr, ops: Vec<GateOp>) -> &mut Self {
        self.push(Instruction::Conditional { cond, ops })
    }

    /// Allocates a fresh classical bit and returns its index.
    pub fn add_cbit(&mut self) -> usize {
        self.num_cbits += 1;
        self.num_cbits - 1
    }

    /// Qubits touched by any instruction, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for inst in &self.instructions {
            match inst {
                Instruction::Barrier { .. } => {}
                other => set.extend(other.qubits()),
            }
        }
        set.into_iter().collect()
    }

    pub fn num_measurements(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_measurement()).count()
    }

    pub fn has_noise(&self) -> bool {
        self.instructions.iter().any(|i| matches!(i, Instruction::Noise(_)))
    }

    /// True when every gate (including conditional ones) is Clifford and no
    /// noise operations are present.
    pub fn is_clifford(&self) -> bool {
        self.instructions.iter().all(|inst| match inst {
            Instruction::Gate(op) => op.gate.is_clifford(),
            Instruction::Conditional { ops, .. } => ops.iter().all(|o| o.gate.is_clifford()),
            Instruction::Noise(_) => false,
            _ => true,
        })
    }

    /// Renumbers qubits so only active ones remain. Returns the compacted
    /// circuit and `map[new] = old`. Topology is dropped.
    pub fn compacted(&self) -> (Circuit, Vec<usize>) {
        let active = self.active_qubits();
        let mut index = vec![usize::MAX; self.num_qubits];
        for (new, &old) in active.iter().enumerate() {
            index[old] = new;
        }
        let remap = |q: usize| index[q];
        let remap_op = |op: &GateOp| GateOp { gate: op.gate, qubits: op.qubits.iter().map(|&q| remap(q)).collect() };
        let instructions = self
            .instructions
            .iter()
            .filter_map(|inst| {
                Some(match inst {
                    Instruction::Gate(op) => Instruction::Gate(remap_op(op)),
                    Instruction::Measure { qubit, cbit, basis } => {
                        Instruction::Measure { qubit: remap(*qubit), cbit: *cbit, basis: *basis }
                    }
                    Instruction::Reset { qubit } => Instruction::Reset { qubit: remap(*qubit) },
                    Instruction::Delay { qubit, duration_ns } => {
                        Instruction::Delay { qubit: remap(*qubit), duration_ns: *duration_ns }
                    }
                    Instruction::Conditional { cond, ops } => {
                        Instruction::Conditional { cond: cond.clone(), ops: ops.iter().map(remap_op).collect() }
                    }
                    Instruction::Barrier { qubits } if qubits.is_empty() => inst.clone(),
                    Instruction::Barrier { qubits } => {
                        let qs: Vec<usize> =
                            qubits.iter().filter(|&&q| index[q] != usize::MAX).map(|&q| remap(q)).collect();
                        if qs.is_empty() {
                            return None;
                        }
                        Instruction::Barrier { qubits: qs }
                    }
                    Instruction::Noise(n) => Instruction::Noise(match n {
                        NoiseOp::Idle { qubit, duration_ns, t1_us, tphi_us } => NoiseOp::Idle {
                            qubit: remap(*qubit),
                            duration_ns: *duration_ns,
                            t1_us: *t1_us,
                            tphi_us: *tphi_us,
                        },
                        NoiseOp::PhaseFlip { qubit, p } => NoiseOp::PhaseFlip { qubit: remap(*qubit), p: *p },
                        NoiseOp::Depolarize { qubits, p } => {
                            NoiseOp::Depolarize { qubits: qubits.iter().map(|&q| remap(q)).collect(), p: *p }
                        }
                        NoiseOp::ReadoutError { .. } => n.clone(),
                    }),
                })
            })
            .collect();
        let circuit = Circuit { num_qubits: active.len(), num_cbits: self.num_cbits, instructions, topology: None };
        (circuit, active)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_detection() {
        assert_eq!(quarter_turns(0.0), Some(0));
        assert_eq!(quarter_turns(std::f64::consts::PI), Some(2));
        assert_eq!(quarter_turns(-FRAC_PI_2), Some(3));
        assert_eq!(quarter_turns(std::f64::consts::PI / 3.0), None);
        assert!(!Gate::Rz(std::f64::consts::PI / 3.0).is_clifford());
        assert!(Gate::Rx(FRAC_PI_2).is_clifford());
    }

    #[test]
    fn ring_topology_is_symmetric_cycle() {
        let ring = Topology::ring(8);
        assert!(ring.adjacent(0, 1) && ring.adjacent(1, 0));
        assert!(ring.adjacent(7, 0));
        assert!(!ring.adjacent(0, 4));
        assert_eq!(ring.neighbors(0), vec![1, 7]);
        assert_eq!(ring.edges().count(), 8);
    }

    #[test]
    fn compaction_drops_untouched_qubits() {
        let mut c = Circuit::new(6, 1);
        c.h(1).cnot(1, 4).measure(4, 0);
        let (small, map) = c.compacted();
        assert_eq!(map, vec![1, 4]);
        assert_eq!(small.num_qubits, 2);
        assert_eq!(small.instructions[1], Instruction::Gate(GateOp::two(Gate::Cnot, 0, 1)));
    }
}
