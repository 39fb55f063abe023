use super::{Basis, Circuit, CondExpr, Gate, GateOp, Instruction};

/// Rewrites X-basis measurements as `H` + Z measurement and resets as a Z
/// measurement into a fresh scratch bit followed by a conditional X.
/// Scratch bits are appended after the circuit's own classical bits.
pub fn lower(circuit: &Circuit) -> Circuit {
    let mut out = Circuit { instructions: Vec::with_capacity(circuit.instructions.len()), ..circuit.clone() };
    for inst in &circuit.instructions {
        match inst {
            Instruction::Measure { qubit, cbit, basis: Basis::X } => {
                out.h(*qubit);
                out.measure(*qubit, *cbit);
            }
            Instruction::Reset { qubit } => {
                let scratch = out.add_cbit();
                out.measure(*qubit, scratch);
                out.cond(CondExpr::bit(scratch), vec![GateOp::one(Gate::X, *qubit)]);
            }
            other => {
                out.push(other.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desugars_x_measure_and_reset() {
        let mut c = Circuit::new(2, 1);
        c.measure_x(0, 0).reset(1);
        let l = lower(&c);
        assert_eq!(l.num_cbits, 2);
        assert_eq!(
            l.instructions,
            vec![
                Instruction::Gate(GateOp::one(Gate::H, 0)),
                Instruction::Measure { qubit: 0, cbit: 0, basis: Basis::Z },
                Instruction::Measure { qubit: 1, cbit: 1, basis: Basis::Z },
                Instruction::Conditional { cond: CondExpr::bit(1), ops: vec![GateOp::one(Gate::X, 1)] },
            ]
        );
    }
}
