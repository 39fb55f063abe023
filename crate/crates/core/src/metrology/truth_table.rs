use super::{MetrologyError, Runner};
use crate::circuit::GateOp;
use crate::engine::{bitstring, PureState};
use crate::protocols::ProtocolCircuit;
use serde::{Deserialize, Serialize};

/// Stochastic matrix of a process on `n` logical qubits: `columns[j][i]` is
/// the probability of output `i` given basis input `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub n: usize,
    pub columns: Vec<Vec<f64>>,
}

impl TruthTable {
    pub fn identity(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, columns: (0..d).map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Checks shape and that every column sums to one.
    pub fn check(&self) -> Result<(), MetrologyError> {
        let d = 1usize << self.n;
        if self.columns.len() != d {
            return Err(MetrologyError::DimensionMismatch { expected: d, found: self.columns.len() });
        }
        for (j, col) in self.columns.iter().enumerate() {
            if col.len() != d {
                return Err(MetrologyError::DimensionMismatch { expected: d, found: col.len() });
            }
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(MetrologyError::InvalidInput(format!("column {j} sums to {s}")));
            }
        }
        Ok(())
    }

    /// CSV with one row per (input, output) pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema_version,input,output,probability\n");
        for (j, col) in self.columns.iter().enumerate() {
            for (i, p) in col.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    crate::suite::SCHEMA_VERSION,
                    bitstring(j as u64, self.n),
                    bitstring(i as u64, self.n),
                    p
                ));
            }
        }
        out
    }
}

/// Truth table of a classical reversible map given by gates on logical
/// qubits `0..n`.
pub fn ideal_truth_table(n: usize, ops: &[GateOp]) -> Result<TruthTable, MetrologyError> {
    let d = 1usize << n;
    let columns = (0..d)
        .map(|j| {
            let mut s = PureState::basis(n, j)?;
            for op in ops {
                s.apply_gate(op.gate, &op.qubits)?;
            }
            Ok(s.amplitudes().iter().map(|a| a.norm_sqr()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>, MetrologyError>>()?;
    Ok(TruthTable { n, columns })
}

/// Prepares every basis input of the protocol, runs it, and records the
/// distribution of its outputs.
pub fn truth_table(pc: &ProtocolCircuit, runner: &Runner) -> Result<TruthTable, MetrologyError> {
    let n = pc.inputs.len();
    if pc.outputs.len() != n {
        return Err(MetrologyError::DimensionMismatch { expected: n, found: pc.outputs.len() });
    }
    let d = 1usize << n;
    let columns = (0..d)
        .map(|j| {
            let (c, bits) = pc.with_basis_input(j as u64).measured();
            let dist = runner.distribution(&c, &bits, j as u64)?;
            Ok((0..d).map(|i| dist.probability(i as u64)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>, MetrologyError>>()?;
    Ok(TruthTable { n, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, Topology};
    use crate::metrology::truth_table_fidelity;
    use crate::protocols::{build_tele_cnot, BellMode, TeleCnotLayout};

    #[test]
    fn identity_vs_cnot_is_one_half() {
        let cnot = ideal_truth_table(2, &[GateOp::two(Gate::Cnot, 0, 1)]).unwrap();
        assert_eq!(truth_table_fidelity(&TruthTable::identity(2), &cnot).unwrap(), 0.5);
        assert_eq!(truth_table_fidelity(&cnot, &cnot).unwrap(), 1.0);
    }

    #[test]
    fn noiseless_teleported_cnot_table() {
        let topo = Topology::ring(8);
        for mode in [BellMode::Unitary, BellMode::Adaptive] {
            let pc = build_tele_cnot(&TeleCnotLayout::default_for(mode), mode, Some(&topo)).unwrap();
            let tt = truth_table(&pc, &Runner::exact(None)).unwrap();
            tt.check().unwrap();
            let ideal = ideal_truth_table(2, &[GateOp::two(Gate::Cnot, 0, 1)]).unwrap();
            assert!((truth_table_fidelity(&tt, &ideal).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = TruthTable::identity(1).to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().ends_with(",0,0,1"));
    }
}
