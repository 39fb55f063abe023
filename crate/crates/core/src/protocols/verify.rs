//! Branch-by-branch verification against the exact enumeration oracle.
//!
//! Unitary protocols are checked on their Choi state: every logical input is
//! entangled with a fresh reference qubit before the protocol runs, so a
//! single enumeration certifies the action on all inputs at once.

use super::{ProtocolCircuit, ProtocolError};
use crate::circuit::{Circuit, Gate, GateOp, Instruction};
use crate::engine::{enumerate_branches, Clbits, OutcomeBranch, PureState};

/// The action a noiseless protocol must realize on every branch.
#[derive(Debug, Clone, PartialEq)]
pub enum Ideal {
    /// Target state of the outputs; qubit `j` of the state is output `j`.
    State(PureState),
    /// Gates on logical qubits `0..k` describing the map from the inputs to
    /// the outputs. An empty list is the identity (state transfer).
    Unitary(Vec<GateOp>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchReport {
    pub cbits: Clbits,
    pub probability: f64,
    pub fidelity: f64,
}

/// Smallest fidelity over the reports, 1 for an empty list.
pub fn min_fidelity(reports: &[BranchReport]) -> f64 {
    reports.iter().map(|r| r.fidelity).fold(1.0, f64::min)
}

/// `(U ⊗ I)|Φ⟩` on `2k` qubits: logical qubit `i` is paired with `k + i`.
pub fn ideal_choi(k: usize, ops: &[GateOp]) -> Result<PureState, ProtocolError> {
    let mut s = PureState::new(2 * k)?;
    for i in 0..k {
        s.apply_gate(Gate::H, &[k + i])?;
        s.apply_gate(Gate::Cnot, &[k + i, i])?;
    }
    for op in ops {
        s.apply_gate(op.gate, &op.qubits)?;
    }
    Ok(s)
}

/// Extends `circuit` with one reference qubit per input, entangled with it at
/// the input slot. Returns the circuit and the qubits to keep (outputs, then
/// references).
pub fn choi_circuit(pc: &ProtocolCircuit, circuit: &Circuit) -> (Circuit, Vec<usize>) {
    let k = pc.inputs.len();
    let n = circuit.num_qubits;
    let mut ext = circuit.clone();
    ext.num_qubits = n + k;
    ext.topology = None;
    let mut prep = Vec::with_capacity(2 * k);
    for (i, &q) in pc.inputs.iter().enumerate() {
        prep.push(Instruction::Gate(GateOp::one(Gate::H, n + i)));
        prep.push(Instruction::Gate(GateOp::two(Gate::Cnot, n + i, q)));
    }
    let tail = ext.instructions.split_off(pc.input_slot);
    ext.instructions.extend(prep);
    ext.instructions.extend(tail);
    let keep = pc.outputs.iter().copied().chain(n..n + k).collect();
    (ext, keep)
}

/// Enumerates every branch of `circuit` (the protocol body with some subset
/// of its corrections) and scores it against the protocol's ideal action.
pub fn verify_circuit(pc: &ProtocolCircuit, circuit: &Circuit) -> Result<Vec<BranchReport>, ProtocolError> {
    let (run, keep, target) = match &pc.ideal {
        Ideal::State(s) => (circuit.clone(), pc.outputs.clone(), s.clone()),
        Ideal::Unitary(ops) => {
            let (ext, keep) = choi_circuit(pc, circuit);
            (ext, keep, ideal_choi(pc.inputs.len(), ops)?)
        }
    };
    enumerate_branches(&run)?.iter().map(|b| score(b, &keep, &target)).collect()
}

fn score(b: &OutcomeBranch, keep: &[usize], target: &PureState) -> Result<BranchReport, ProtocolError> {
    let fidelity = b.state.fidelity_reduced(keep, target)?;
    Ok(BranchReport { cbits: b.cbits, probability: b.probability, fidelity })
}

impl ProtocolCircuit {
    /// Oracle check of the corrected circuit.
    pub fn verify(&self) -> Result<Vec<BranchReport>, ProtocolError> {
        verify_circuit(self, &self.circuit())
    }

    /// Worst-branch fidelity with each single correction removed, in rule
    /// order.
    pub fn single_correction_controls(&self) -> Result<Vec<f64>, ProtocolError> {
        (0..self.rule.len()).map(|i| Ok(min_fidelity(&verify_circuit(self, &self.without_correction(i))?))).collect()
    }

    /// Worst-branch fidelity with every correction removed.
    pub fn uncorrected_min_fidelity(&self) -> Result<f64, ProtocolError> {
        Ok(min_fidelity(&verify_circuit(self, &self.without_corrections())?))
    }
}
