use super::{lower, Circuit, Instruction};

/// Circuit depth under as-soon-as-possible layering.
///
/// A layer holds operations on disjoint qubits. X-basis measurements and
/// resets count in their lowered form, a conditional gate sits strictly
/// after the layer of every measurement it reads, and delays, barriers and
/// noise operations occupy no layer (barriers still align the frontier of
/// the qubits they name).
pub fn depth(circuit: &Circuit) -> usize {
    let lowered = lower(circuit);
    let mut frontier = vec![0usize; lowered.num_qubits];
    let mut ready = vec![0usize; lowered.num_cbits];
    let mut max_layer = 0;

    let mut place = |qubits: &[usize], after: usize, frontier: &mut [usize]| -> usize {
        let layer = qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0).max(after) + 1;
        for &q in qubits {
            frontier[q] = layer;
        }
        max_layer = max_layer.max(layer);
        layer
    };

    for inst in &lowered.instructions {
        match inst {
            Instruction::Gate(op) => {
                place(&op.qubits, 0, &mut frontier);
            }
            Instruction::Measure { qubit, cbit, .. } => {
                ready[*cbit] = place(&[*qubit], 0, &mut frontier);
            }
            Instruction::Conditional { cond, ops } => {
                let after = cond.bits().iter().map(|&b| ready[b]).max().unwrap_or(0);
                for op in ops {
                    place(&op.qubits, after, &mut frontier);
                }
            }
            Instruction::Barrier { qubits } => {
                let qs: Vec<usize> =
                    if qubits.is_empty() { (0..lowered.num_qubits).collect() } else { qubits.clone() };
                let sync = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
                for q in qs {
                    frontier[q] = sync;
                }
            }
            Instruction::Reset { .. } => unreachable!("lowered away"),
            Instruction::Delay { .. } | Instruction::Noise(_) => {}
        }
    }
    max_layer
}
