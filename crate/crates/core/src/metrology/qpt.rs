use super::{MetrologyError, Runner};
use crate::circuit::{Circuit, Gate, GateOp};
use crate::protocols::ProtocolCircuit;
use serde::{Deserialize, Serialize};

/// Single-qubit Pauli transfer matrix in the basis order (I, X, Y, Z):
/// `r[i][j] = Tr(P_i Λ(P_j)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ptm {
    pub r: [[f64; 4]; 4],
}

impl Ptm {
    pub fn identity() -> Self {
        Self::diagonal([1.0; 4])
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut r = [[0.0; 4]; 4];
        for i in 0..4 {
            r[i][i] = d[i];
        }
        Self { r }
    }

    pub fn diag(&self) -> [f64; 4] {
        [self.r[0][0], self.r[1][1], self.r[2][2], self.r[3][3]]
    }

    /// `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Ptm, w: f64) -> Ptm {
        let mut r = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] = w * self.r[i][j] + (1.0 - w) * other.r[i][j];
            }
        }
        Ptm { r }
    }
}

/// Input states of the tomography, as gates from `|0⟩`: `|0⟩`, `|1⟩`,
/// `|+⟩`, `|+i⟩`.
pub const QPT_PREPARATIONS: [&[Gate]; 4] = [&[], &[Gate::X], &[Gate::H], &[Gate::H, Gate::S]];

/// Linear inversion from the output Bloch vectors of the four
/// preparations. The first row is fixed to `(1, 0, 0, 0)`.
pub fn ptm_from_bloch(out: &[[f64; 3]; 4]) -> Ptm {
    let [o0, o1, op, oi] = out;
    let mut r = [[0.0; 4]; 4];
    r[0][0] = 1.0;
    for k in 0..3 {
        let id = (o0[k] + o1[k]) / 2.0;
        r[k + 1][0] = id;
        r[k + 1][3] = (o0[k] - o1[k]) / 2.0;
        r[k + 1][1] = op[k] - id;
        r[k + 1][2] = oi[k] - id;
    }
    Ptm { r }
}

/// Tomography of a single-qubit process. `process(prep)` returns a circuit
/// that applies `prep` to the input qubit and then runs the process;
/// `output` is the qubit holding the result.
pub fn qpt_single_qubit<F>(process: F, output: usize, runner: &Runner) -> Result<Ptm, MetrologyError>
where
    F: Fn(&[Gate]) -> Result<Circuit, MetrologyError>,
{
    let mut out = [[0.0; 3]; 4];
    for (k, prep) in QPT_PREPARATIONS.iter().enumerate() {
        out[k] = runner.bloch(&process(prep)?, output, k as u64)?;
    }
    Ok(ptm_from_bloch(&out))
}

/// Tomography of a one-input, one-output protocol.
pub fn qpt_protocol(pc: &ProtocolCircuit, runner: &Runner) -> Result<Ptm, MetrologyError> {
    if pc.inputs.len() != 1 || pc.outputs.len() != 1 {
        return Err(MetrologyError::DimensionMismatch { expected: 1, found: pc.inputs.len().max(pc.outputs.len()) });
    }
    let input = pc.inputs[0];
    qpt_single_qubit(
        |prep| {
            let ops: Vec<GateOp> = prep.iter().map(|&g| GateOp::one(g, input)).collect();
            Ok(pc.with_input(&ops).circuit())
        },
        pc.outputs[0],
        runner,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Topology;
    use crate::protocols::build_teleport;

    fn close(a: &Ptm, b: &Ptm, tol: f64) -> bool {
        a.r.iter().flatten().zip(b.r.iter().flatten()).all(|(x, y)| (x - y).abs() < tol)
    }

    fn gate_process(gates: &'static [Gate]) -> impl Fn(&[Gate]) -> Result<Circuit, MetrologyError> {
        move |prep| {
            let mut c = Circuit::new(1, 0);
            for &g in prep.iter().chain(gates) {
                c.gate(g, &[0]);
            }
            Ok(c)
        }
    }

    #[test]
    fn identity_and_paulis() {
        let r = Runner::exact(None);
        assert!(close(&qpt_single_qubit(gate_process(&[]), 0, &r).unwrap(), &Ptm::identity(), 1e-12));
        let x = qpt_single_qubit(gate_process(&[Gate::X]), 0, &r).unwrap();
        assert!(close(&x, &Ptm::diagonal([1.0, 1.0, -1.0, -1.0]), 1e-12));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let h = qpt_single_qubit(gate_process(&[Gate::H]), 0, &Runner::exact(None)).unwrap();
        let mut want = [[0.0; 4]; 4];
        want[0][0] = 1.0;
        want[1][3] = 1.0;
        want[3][1] = 1.0;
        want[2][2] = -1.0;
        assert!(close(&h, &Ptm { r: want }, 1e-12));
    }

    #[test]
    fn noiseless_teleport_is_identity() {
        let topo = Topology::ring(8);
        let pc = build_teleport(0, &[1, 2, 3, 4], 4, Some(&topo)).unwrap();
        let ptm = qpt_protocol(&pc, &Runner::exact(None)).unwrap();
        assert!(close(&ptm, &Ptm::identity(), 1e-9));
    }
}
