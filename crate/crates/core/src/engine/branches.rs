use super::program::{write_bit, Program, Step};
use super::{Clbits, EngineError, PureState, PRUNE_THRESHOLD};
use crate::circuit::{Basis, Circuit, Gate};

pub const MAX_BRANCH_MEASUREMENTS: usize = 20;

/// One complete assignment of measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBranch {
    /// Final classical register.
    pub cbits: Clbits,
    /// Every measurement outcome in execution order, resets included.
    pub outcomes: Vec<bool>,
    pub probability: f64,
    /// Normalized post-measurement state over all circuit qubits.
    pub state: PureState,
}

struct Frame {
    pc: usize,
    state: PureState,
    reg: u64,
    probability: f64,
    outcomes: Vec<bool>,
}

/// Expands both outcomes of every measurement depth-first, with exact
/// conditional probabilities. Branches below the prune threshold are
/// dropped. Noise operations are rejected.
pub fn enumerate_branches(circuit: &Circuit) -> Result<Vec<OutcomeBranch>, EngineError> {
    let count = circuit.num_measurements();
    if count > MAX_BRANCH_MEASUREMENTS {
        return Err(EngineError::BranchBound { count, limit: MAX_BRANCH_MEASUREMENTS });
    }
    if circuit.has_noise() {
        return Err(EngineError::NoiseUnsupported { engine: "branch enumeration" });
    }
    let program = Program::compile(circuit, false)?;
    let mut out = Vec::new();
    let mut stack =
        vec![Frame { pc: 0, state: PureState::new(program.num_qubits)?, reg: 0, probability: 1.0, outcomes: Vec::new() }];

    while let Some(mut f) = stack.pop() {
        let mut split = None;
        while f.pc < program.steps.len() {
            match &program.steps[f.pc] {
                Step::Gate(g, qs) => f.state.apply_gate(*g, qs)?,
                Step::Cond(cond, ops) => {
                    if cond.eval_packed(f.reg) {
                        for op in ops {
                            f.state.apply_gate(op.gate, &op.qubits)?;
                        }
                    }
                }
                Step::Measure { qubit, basis, .. } => {
                    if *basis == Basis::X {
                        f.state.apply_gate(Gate::H, &[*qubit])?;
                    }
                    split = Some(*qubit);
                    break;
                }
                Step::Reset(q) => {
                    split = Some(*q);
                    break;
                }
                Step::Channel(..) | Step::Readout { .. } => unreachable!("noise rejected above"),
            }
            f.pc += 1;
        }
        let Some(qubit) = split else {
            out.push(OutcomeBranch {
                cbits: Clbits { bits: f.reg, width: program.num_cbits },
                outcomes: f.outcomes,
                probability: f.probability,
                state: f.state,
            });
            continue;
        };
        // Push outcome 1 first so outcome 0 is explored first.
        for outcome in [true, false] {
            let mut state = f.state.clone();
            let p = state.project(qubit, outcome);
            let probability = f.probability * p;
            if probability < PRUNE_THRESHOLD {
                continue;
            }
            let mut reg = f.reg;
            match &program.steps[f.pc] {
                Step::Measure { cbit, basis, .. } => {
                    reg = write_bit(reg, *cbit, outcome);
                    if *basis == Basis::X {
                        state.apply_gate(Gate::H, &[qubit])?;
                    }
                }
                _ => {
                    if outcome {
                        state.apply_gate(Gate::X, &[qubit])?;
                    }
                }
            }
            let mut outcomes = f.outcomes.clone();
            outcomes.push(outcome);
            stack.push(Frame { pc: f.pc + 1, state, reg, probability, outcomes });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_then_measure_gives_two_halves() {
        let mut c = Circuit::new(1, 1);
        c.h(0).measure(0, 0);
        let b = enumerate_branches(&c).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|x| (x.probability - 0.5).abs() < 1e-12));
        assert_eq!(b[0].cbits.bits, 0);
    }

    #[test]
    fn deterministic_measure_prunes() {
        let mut c = Circuit::new(1, 1);
        c.measure(0, 0);
        let b = enumerate_branches(&c).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].probability, 1.0);
    }

    #[test]
    fn branch_bound_enforced() {
        let mut c = Circuit::new(1, 1);
        for _ in 0..21 {
            c.measure(0, 0);
        }
        assert!(matches!(enumerate_branches(&c), Err(EngineError::BranchBound { .. })));
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut c = Circuit::new(1, 0);
        c.h(0).reset(0);
        for b in enumerate_branches(&c).unwrap() {
            assert!((b.state.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        }
    }
}
