use super::program::{write_bit, Program, Step};
use super::{Clbits, DensityMatrix, Distribution, EngineError, PRUNE_THRESHOLD};
use crate::circuit::{Basis, Circuit, Gate};
use crate::noise::{decorate, NoiseModel};
use std::collections::BTreeMap;

/// Final state of one classical register value.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBranch {
    pub cbits: Clbits,
    pub probability: f64,
    /// Normalized state over the active qubits, in the order of
    /// [`DensityRun::qubits`].
    pub state: DensityMatrix,
}

/// Result of exact density-matrix execution.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRun {
    /// `qubits[j]` is the circuit qubit stored as qubit `j` of every branch
    /// state.
    pub qubits: Vec<usize>,
    pub width: usize,
    pub branches: Vec<DensityBranch>,
}

impl DensityRun {
    pub fn distribution(&self) -> Distribution {
        Distribution::from_probabilities(self.width, self.branches.iter().map(|b| (b.cbits.bits, b.probability)))
    }

    /// Probability-weighted mixture of all branch states.
    pub fn mixture(&self) -> DensityMatrix {
        let mut iter = self.branches.iter();
        let first = iter.next().expect("at least one branch");
        let mut acc = first.state.clone();
        acc.scale(first.probability);
        for b in iter {
            let mut s = b.state.clone();
            s.scale(b.probability);
            acc.add_assign(&s);
        }
        acc
    }

    /// Translates circuit qubits to positions in the branch states.
    pub fn local(&self, circuit_qubits: &[usize]) -> Result<Vec<usize>, EngineError> {
        circuit_qubits
            .iter()
            .map(|q| {
                self.qubits.iter().position(|x| x == q).ok_or(EngineError::QubitOutOfRange {
                    qubit: *q,
                    num_qubits: self.qubits.len(),
                })
            })
            .collect()
    }

    /// Mixture reduced to the given circuit qubits, in the given order.
    pub fn reduced(&self, circuit_qubits: &[usize]) -> Result<DensityMatrix, EngineError> {
        self.mixture().partial_trace(&self.local(circuit_qubits)?)
    }
}

fn insert(map: &mut BTreeMap<u64, DensityMatrix>, reg: u64, rho: DensityMatrix) {
    match map.get_mut(&reg) {
        Some(existing) => existing.add_assign(&rho),
        None => {
            map.insert(reg, rho);
        }
    }
}

/// Exact execution of a circuit that may contain noise operations.
///
/// The state is a map from classical register values to unnormalized
/// density matrices. Measurements split each entry by outcome, readout errors
/// split it by reported value, and conditionals act per entry. With
/// `keep_bits`, classical bits outside the list are cleared once no later
/// instruction reads them, which merges branches that only differ there.
pub fn run_density_decorated(circuit: &Circuit, keep_bits: Option<&[usize]>) -> Result<DensityRun, EngineError> {
    let program = Program::compile(circuit, true)?;
    let mut last_read = vec![None::<usize>; program.num_cbits];
    for (i, step) in program.steps.iter().enumerate() {
        let reads = match step {
            Step::Cond(cond, _) => cond.bits(),
            Step::Readout { cbit, .. } => vec![*cbit],
            _ => Vec::new(),
        };
        for b in reads {
            last_read[b] = Some(i);
        }
    }
    let kept: Vec<bool> = match keep_bits {
        Some(list) => (0..program.num_cbits).map(|b| list.contains(&b)).collect(),
        None => vec![true; program.num_cbits],
    };

    let mut branches: BTreeMap<u64, DensityMatrix> = BTreeMap::new();
    branches.insert(0, DensityMatrix::new(program.num_qubits)?);

    for (i, step) in program.steps.iter().enumerate() {
        match step {
            Step::Gate(g, qs) => {
                for rho in branches.values_mut() {
                    rho.apply_gate(*g, qs)?;
                }
            }
            Step::Cond(cond, ops) => {
                for (reg, rho) in branches.iter_mut() {
                    if cond.eval_packed(*reg) {
                        for op in ops {
                            rho.apply_gate(op.gate, &op.qubits)?;
                        }
                    }
                }
            }
            Step::Channel(ch, qs) => {
                for rho in branches.values_mut() {
                    rho.apply_channel(ch, qs)?;
                }
            }
            Step::Measure { qubit, cbit, basis } => {
                let mut next = BTreeMap::new();
                for (reg, mut rho) in std::mem::take(&mut branches) {
                    if *basis == Basis::X {
                        rho.apply_gate(Gate::H, &[*qubit])?;
                    }
                    let mut one = rho.clone();
                    let p1 = one.project_unnormalized(*qubit, true);
                    let p0 = rho.project_unnormalized(*qubit, false);
                    for (outcome, mut part, p) in [(false, rho, p0), (true, one, p1)] {
                        if p < PRUNE_THRESHOLD {
                            continue;
                        }
                        if *basis == Basis::X {
                            part.apply_gate(Gate::H, &[*qubit])?;
                        }
                        insert(&mut next, write_bit(reg, *cbit, outcome), part);
                    }
                }
                branches = next;
            }
            Step::Reset(q) => {
                for rho in branches.values_mut() {
                    let mut one = rho.clone();
                    one.project_unnormalized(*q, true);
                    one.apply_gate(Gate::X, &[*q])?;
                    rho.project_unnormalized(*q, false);
                    rho.add_assign(&one);
                }
            }
            Step::Readout { cbit, p00, p11 } => {
                let mut next = BTreeMap::new();
                for (reg, rho) in std::mem::take(&mut branches) {
                    let bit = (reg >> cbit) & 1 == 1;
                    let keep = if bit { *p11 } else { *p00 };
                    if keep < 1.0 {
                        let mut flipped = rho.clone();
                        flipped.scale(1.0 - keep);
                        insert(&mut next, write_bit(reg, *cbit, !bit), flipped);
                    }
                    let mut same = rho;
                    same.scale(keep);
                    insert(&mut next, reg, same);
                }
                branches = next;
            }
        }
        let drop: u64 = (0..program.num_cbits)
            .filter(|&b| !kept[b] && last_read[b].map_or(true, |r| r <= i))
            .map(|b| 1u64 << b)
            .sum();
        if drop != 0 && branches.keys().any(|k| k & drop != 0) {
            let mut next = BTreeMap::new();
            for (reg, rho) in std::mem::take(&mut branches) {
                insert(&mut next, reg & !drop, rho);
            }
            branches = next;
        }
        branches.retain(|_, rho| rho.trace() >= PRUNE_THRESHOLD);
    }

    let total: f64 = branches.values().map(DensityMatrix::trace).sum();
    let out = branches
        .into_iter()
        .map(|(reg, mut rho)| {
            let p = rho.trace();
            rho.scale(1.0 / p);
            DensityBranch { cbits: Clbits { bits: reg, width: program.num_cbits }, probability: p / total, state: rho }
        })
        .collect();
    Ok(DensityRun { qubits: program.qubits, width: program.num_cbits, branches: out })
}

/// Decorates with `noise` when given, then runs exactly.
pub fn run_density(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    keep_bits: Option<&[usize]>,
) -> Result<DensityRun, EngineError> {
    match noise {
        Some(model) => {
            let noisy = decorate(circuit, model).map_err(|e| EngineError::Noise(e.to_string()))?;
            run_density_decorated(&noisy, keep_bits)
        }
        None => run_density_decorated(circuit, keep_bits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CondExpr, GateOp};
    use crate::noise::NoiseModel;

    #[test]
    fn feed_forward_is_exact() {
        // Teleport-like correction: measure a Bell half, fix the other.
        let mut c = Circuit::new(2, 1);
        c.h(0).cnot(0, 1).measure(0, 0).cond(CondExpr::bit(0), vec![GateOp::one(Gate::X, 1)]);
        let run = run_density(&c, None, None).unwrap();
        assert_eq!(run.branches.len(), 2);
        for b in &run.branches {
            let r = b.state.partial_trace(&[1]).unwrap();
            assert!((r.entry(0, 0).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn readout_error_splits_register() {
        let mut noise = NoiseModel::noiseless(1);
        noise.readout.qubits[0].p00 = 0.9;
        let mut c = Circuit::new(1, 1);
        c.measure(0, 0);
        let d = run_density(&c, Some(&noise), None).unwrap().distribution();
        assert!((d.probability(1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn dropped_bits_merge() {
        let mut c = Circuit::new(2, 2);
        c.h(0).measure(0, 0).cond(CondExpr::bit(0), vec![GateOp::one(Gate::X, 0)]).measure(1, 1);
        let run = run_density(&c, None, Some(&[1])).unwrap();
        assert_eq!(run.branches.len(), 1);
        assert!((run.branches[0].probability - 1.0).abs() < 1e-12);
    }
}
