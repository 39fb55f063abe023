//! Builders for the constant-depth adaptive protocols, their real-time
//! decoders and Pauli-frame corrections.
//!
//! Every builder returns a [`ProtocolCircuit`]: the uncorrected body, the
//! [`CorrectionRule`] appended after it, and the ideal action used by the
//! branch oracle in [`verify`].

mod cnot;
mod fanout;
mod frame;
mod ghz;
mod teleport;
pub mod verify;

use crate::circuit::{Circuit, CondExpr, Gate, GateOp, Instruction};
use crate::engine::{EngineError, PureState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cnot::{build_tele_cnot, BellMode, TeleCnotLayout};
pub use fanout::{build_fanout, derive_fanout_rule, derive_fanout_rule_for, fanout_body, FanoutLayout};
pub use frame::{compose_frames, PauliFrame};
pub use ghz::{build_ghz_adaptive, build_ghz_ladder, decode_ghz, GhzPlan};
pub use teleport::{build_entanglement_swap, build_teleport, BellState};
pub use verify::{BranchReport, Ideal};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("plan mismatch: {0}")]
    PlanMismatch(String),
    #[error("invalid qubit assignment: {0}")]
    InvalidAssignment(String),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("chain of length {0} cannot be split into Bell pairs")]
    OddChain(usize),
    #[error("no correction rule reproduces the ideal action: {0}")]
    NoRule(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Which Pauli a correction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FramePauli {
    X,
    Z,
}

impl FramePauli {
    pub fn gate(self) -> Gate {
        match self {
            FramePauli::X => Gate::X,
            FramePauli::Z => Gate::Z,
        }
    }
}

/// One feed-forward correction: apply `pauli` to `qubit` when `when` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub qubit: usize,
    pub pauli: FramePauli,
    pub when: CondExpr,
}

/// The decoder of a protocol, expressed as conditions over MCM outcomes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRule {
    pub corrections: Vec<Correction>,
}

impl CorrectionRule {
    pub fn push(&mut self, qubit: usize, pauli: FramePauli, when: CondExpr) {
        if when != CondExpr::Const(false) {
            self.corrections.push(Correction { qubit, pauli, when });
        }
    }

    pub fn len(&self) -> usize {
        self.corrections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corrections.is_empty()
    }

    /// Classical bits read by any correction.
    pub fn cbits(&self) -> Vec<usize> {
        let mut bits: Vec<usize> = self.corrections.iter().flat_map(|c| c.when.bits()).collect();
        bits.sort_unstable();
        bits.dedup();
        bits
    }

    /// Frame the decoder selects for a given register value.
    pub fn frame(&self, num_qubits: usize, register: u64) -> PauliFrame {
        let mut frame = PauliFrame::identity(num_qubits);
        for c in &self.corrections {
            if c.when.eval_packed(register) {
                match c.pauli {
                    FramePauli::X => frame.x_mask ^= 1 << c.qubit,
                    FramePauli::Z => frame.z_mask ^= 1 << c.qubit,
                }
            }
        }
        frame
    }

    /// One conditional instruction per correction, in order, skipping `omit`.
    pub fn instructions(&self, omit: Option<usize>) -> Vec<Instruction> {
        self.corrections
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != omit)
            .map(|(_, c)| Instruction::Conditional {
                cond: c.when.clone(),
                ops: vec![GateOp::one(c.pauli.gate(), c.qubit)],
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// A protocol circuit split into its uncorrected body and its decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolCircuit {
    pub name: String,
    /// Everything except the feed-forward corrections.
    pub body: Circuit,
    pub rule: CorrectionRule,
    /// Qubits carrying the logical input, in logical order.
    pub inputs: Vec<usize>,
    /// Qubits carrying the logical output, in logical order.
    pub outputs: Vec<usize>,
    /// Instruction index at which input preparation is inserted.
    pub input_slot: usize,
    pub ideal: Ideal,
}

impl ProtocolCircuit {
    /// Body followed by every correction.
    pub fn circuit(&self) -> Circuit {
        self.assemble(true, None)
    }

    /// Body only: the negative control with feed-forward switched off.
    pub fn without_corrections(&self) -> Circuit {
        self.assemble(false, None)
    }

    /// Full circuit with the `index`-th correction removed.
    pub fn without_correction(&self, index: usize) -> Circuit {
        self.assemble(true, Some(index))
    }

    fn assemble(&self, corrections: bool, omit: Option<usize>) -> Circuit {
        let mut c = self.body.clone();
        if corrections {
            c.instructions.extend(self.rule.instructions(omit));
        }
        c
    }

    /// Copy with `prep` inserted at the input slot.
    pub fn with_input(&self, prep: &[GateOp]) -> ProtocolCircuit {
        let mut out = self.clone();
        let tail = out.body.instructions.split_off(self.input_slot);
        out.body.instructions.extend(prep.iter().cloned().map(Instruction::Gate));
        out.body.instructions.extend(tail);
        out
    }

    /// Prepares computational basis input `index`; bit `i` of `index` sets
    /// logical input `i`.
    pub fn with_basis_input(&self, index: u64) -> ProtocolCircuit {
        let prep: Vec<GateOp> = self
            .inputs
            .iter()
            .enumerate()
            .filter(|(i, _)| (index >> i) & 1 == 1)
            .map(|(_, &q)| GateOp::one(Gate::X, q))
            .collect();
        self.with_input(&prep)
    }

    /// Full circuit with a Z measurement of every output onto fresh classical
    /// bits. Returns the circuit and the new bits in output order.
    pub fn measured(&self) -> (Circuit, Vec<usize>) {
        let mut c = self.circuit();
        let bits: Vec<usize> = self
            .outputs
            .iter()
            .map(|&q| {
                let b = c.add_cbit();
                c.measure(q, b);
                b
            })
            .collect();
        (c, bits)
    }

    /// Classical bits written by the body.
    pub fn mcm_bits(&self) -> Vec<usize> {
        (0..self.body.num_cbits).collect()
    }
}

/// Width needed to hold every listed qubit.
pub(crate) fn width(qubits: &[usize]) -> usize {
    qubits.iter().max().map_or(0, |m| m + 1)
}

pub(crate) fn check_distinct(qubits: &[usize]) -> Result<(), ProtocolError> {
    let mut seen = qubits.to_vec();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(ProtocolError::InvalidAssignment(format!("qubit {} assigned twice", w[0])));
    }
    Ok(())
}

/// Ideal two-qubit Bell states on `(first, second)`.
pub(crate) fn bell(first_bit: bool, second_bit: bool) -> PureState {
    let mut s = PureState::new(2).expect("two qubits");
    s.apply_gate(Gate::H, &[0]).expect("in range");
    s.apply_gate(Gate::Cnot, &[0, 1]).expect("in range");
    if first_bit {
        s.apply_gate(Gate::Z, &[0]).expect("in range");
    }
    if second_bit {
        s.apply_gate(Gate::X, &[1]).expect("in range");
    }
    s
}
