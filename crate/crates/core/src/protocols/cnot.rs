use super::{check_distinct, width, CorrectionRule, FramePauli, GhzPlan, Ideal, ProtocolCircuit, ProtocolError};
use crate::circuit::{Circuit, CondExpr, Gate, GateOp, Topology};
use serde::{Deserialize, Serialize};

/// How the Bell pair shared by the two ends of the ancilla chain is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellMode {
    /// `H` and a CNOT on two adjacent ancillas.
    Unitary,
    /// Constant-depth GHZ preparation over every other chain qubit; chain
    /// qubits strictly inside the pair are then measured in X.
    Adaptive,
}

/// Control, target and the ancilla chain joining them. `chain[0]` couples to
/// the control and the last chain qubit to the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeleCnotLayout {
    pub control: usize,
    pub target: usize,
    pub chain: Vec<usize>,
}

impl TeleCnotLayout {
    /// Control 1, target 4, unitary Bell pair on 2 and 3.
    pub fn unitary_default() -> Self {
        Self { control: 1, target: 4, chain: vec![2, 3] }
    }

    /// Control 0, target 4, adaptive Bell pair on 1 and 3 through 2.
    pub fn adaptive_default() -> Self {
        Self { control: 0, target: 4, chain: vec![1, 2, 3] }
    }

    pub fn default_for(mode: BellMode) -> Self {
        match mode {
            BellMode::Unitary => Self::unitary_default(),
            BellMode::Adaptive => Self::adaptive_default(),
        }
    }
}

/// Gate-teleported CNOT from `control` to `target`.
///
/// After the Bell pair `(A, B)` is ready the circuit applies CNOT
/// control→A and CNOT B→target, measures A in Z and B in X, and corrects
/// X on the target and Z on the control. Bell-pair preparation errors from
/// adaptive mode are folded into the same two corrections.
pub fn build_tele_cnot(
    layout: &TeleCnotLayout,
    mode: BellMode,
    topology: Option<&Topology>,
) -> Result<ProtocolCircuit, ProtocolError> {
    let chain = &layout.chain;
    check_distinct(&[&[layout.control, layout.target][..], chain].concat())?;
    let m = chain.len();
    match mode {
        BellMode::Unitary if m != 2 => {
            return Err(ProtocolError::InvalidAssignment(format!("unitary mode needs 2 chain qubits, found {m}")))
        }
        BellMode::Adaptive if m < 3 || m % 2 == 0 => {
            return Err(ProtocolError::InvalidAssignment(format!(
                "adaptive mode needs an odd chain of at least 3 qubits, found {m}"
            )))
        }
        _ => {}
    }
    let (a, b) = (chain[0], chain[m - 1]);
    if let Some(t) = topology {
        for (p, q) in [(layout.control, a), (b, layout.target)] {
            if !t.adjacent(p, q) {
                return Err(ProtocolError::InvalidAssignment(format!("qubits {p} and {q} are not coupled")));
            }
        }
    }

    let all = [&[layout.control, layout.target][..], chain].concat();
    let mut body = Circuit::new(width(&all), 0);
    let mut x_sources = Vec::new();
    let mut z_sources = Vec::new();
    match mode {
        BellMode::Unitary => {
            if let Some(t) = topology {
                if !t.adjacent(a, b) {
                    return Err(ProtocolError::InvalidAssignment(format!("qubits {a} and {b} are not coupled")));
                }
            }
            body.h(a).cnot(a, b);
        }
        BellMode::Adaptive => {
            let data: Vec<usize> = chain.iter().step_by(2).copied().collect();
            let ancillas: Vec<usize> = chain.iter().skip(1).step_by(2).copied().collect();
            let plan = GhzPlan::new(data.clone(), ancillas);
            plan.check(topology)?;
            body.num_cbits = plan.cbits.len();
            plan.append_body(&mut body);
            x_sources.extend(plan.cbits.iter().copied());
            for &d in &data[1..data.len() - 1] {
                let bit = body.add_cbit();
                body.measure_x(d, bit);
                z_sources.push(bit);
            }
        }
    }
    body.cnot(layout.control, a).cnot(b, layout.target);
    let za = body.add_cbit();
    let xb = body.add_cbit();
    body.measure(a, za).measure_x(b, xb);
    x_sources.push(za);
    z_sources.push(xb);
    x_sources.sort_unstable();
    z_sources.sort_unstable();

    let mut rule = CorrectionRule::default();
    rule.push(layout.target, FramePauli::X, CondExpr::parity(&x_sources));
    rule.push(layout.control, FramePauli::Z, CondExpr::parity(&z_sources));
    let name = match mode {
        BellMode::Unitary => "tele_cnot_unitary",
        BellMode::Adaptive => "tele_cnot_adaptive",
    };
    Ok(ProtocolCircuit {
        name: name.into(),
        body,
        rule,
        inputs: vec![layout.control, layout.target],
        outputs: vec![layout.control, layout.target],
        input_slot: 0,
        ideal: Ideal::Unitary(vec![GateOp::two(Gate::Cnot, 0, 1)]),
    })
}
