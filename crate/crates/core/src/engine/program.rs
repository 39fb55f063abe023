use super::EngineError;
use crate::circuit::{validate, Basis, Circuit, CondExpr, Gate, GateOp, Instruction, NoiseOp};
use crate::noise::{idle_channel, KrausChannel};

/// Executable form of a circuit with channels precomputed.
#[derive(Debug, Clone)]
pub(crate) enum Step {
    Gate(Gate, Vec<usize>),
    Measure { qubit: usize, cbit: usize, basis: Basis },
    Reset(usize),
    Cond(CondExpr, Vec<GateOp>),
    Channel(KrausChannel, Vec<usize>),
    Readout { cbit: usize, p00: f64, p11: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub steps: Vec<Step>,
    /// `qubits[new] = original index`.
    pub qubits: Vec<usize>,
}

impl Program {
    /// Validates and compiles. With `compact`, only active qubits are kept.
    pub fn compile(circuit: &Circuit, compact: bool) -> Result<Program, EngineError> {
        if let Some(v) = validate(circuit, None).into_iter().next() {
            return Err(EngineError::InvalidCircuit(v));
        }
        if circuit.num_cbits > 64 {
            return Err(EngineError::TooManyCbits(circuit.num_cbits));
        }
        let (c, qubits) = if compact { circuit.compacted() } else { (circuit.clone(), (0..circuit.num_qubits).collect()) };
        let mut steps = Vec::with_capacity(c.instructions.len());
        for inst in &c.instructions {
            match inst {
                Instruction::Gate(op) => steps.push(Step::Gate(op.gate, op.qubits.clone())),
                Instruction::Measure { qubit, cbit, basis } => {
                    steps.push(Step::Measure { qubit: *qubit, cbit: *cbit, basis: *basis })
                }
                Instruction::Reset { qubit } => steps.push(Step::Reset(*qubit)),
                Instruction::Conditional { cond, ops } => steps.push(Step::Cond(cond.clone(), ops.clone())),
                Instruction::Delay { .. } | Instruction::Barrier { .. } => {}
                Instruction::Noise(op) => match op {
                    NoiseOp::ReadoutError { cbit, p00, p11 } => {
                        steps.push(Step::Readout { cbit: *cbit, p00: *p00, p11: *p11 })
                    }
                    NoiseOp::Idle { qubit, duration_ns, t1_us, tphi_us } => {
                        let ch = idle_channel(*t1_us, *tphi_us, *duration_ns).map_err(|e| EngineError::Noise(e.to_string()))?;
                        if !ch.is_identity() {
                            steps.push(Step::Channel(ch, vec![*qubit]));
                        }
                    }
                    other => {
                        let ch = KrausChannel::from_op(other).expect("quantum noise op");
                        if !ch.is_identity() {
                            steps.push(Step::Channel(ch, other.qubits()));
                        }
                    }
                },
            }
        }
        Ok(Program { num_qubits: c.num_qubits, num_cbits: c.num_cbits, steps, qubits })
    }
}

pub(crate) fn write_bit(reg: u64, cbit: usize, value: bool) -> u64 {
    (reg & !(1 << cbit)) | ((value as u64) << cbit)
}
