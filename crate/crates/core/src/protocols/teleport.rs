use super::{bell, check_distinct, width, CorrectionRule, FramePauli, Ideal, ProtocolCircuit, ProtocolError};
use crate::circuit::{Circuit, CondExpr, Topology};
use crate::engine::PureState;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Output of entanglement swapping for the given end initializations:
    /// `00 → Φ+`, `10 → Φ−`, `01 → Ψ+`, `11 → Ψ−`.
    pub fn from_input(bits: [bool; 2]) -> Self {
        match bits {
            [false, false] => BellState::PhiPlus,
            [true, false] => BellState::PhiMinus,
            [false, true] => BellState::PsiPlus,
            [true, true] => BellState::PsiMinus,
        }
    }

    pub fn state(self) -> PureState {
        match self {
            BellState::PhiPlus => bell(false, false),
            BellState::PhiMinus => bell(true, false),
            BellState::PsiPlus => bell(false, true),
            BellState::PsiMinus => bell(true, true),
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellState::PhiPlus => "Phi+",
            BellState::PhiMinus => "Phi-",
            BellState::PsiPlus => "Psi+",
            BellState::PsiMinus => "Psi-",
        })
    }
}

fn check_chain(chain: &[usize], topology: Option<&Topology>, extra: Option<usize>) -> Result<(), ProtocolError> {
    if chain.is_empty() || chain.len() % 2 == 1 {
        return Err(ProtocolError::OddChain(chain.len()));
    }
    let mut path: Vec<usize> = extra.into_iter().collect();
    path.extend_from_slice(chain);
    check_distinct(&path)?;
    if let Some(t) = topology {
        for w in path.windows(2) {
            if !t.adjacent(w[0], w[1]) {
                return Err(ProtocolError::InvalidAssignment(format!("qubits {} and {} are not coupled", w[0], w[1])));
            }
        }
    }
    Ok(())
}

/// Bell pairs on `(chain[2k], chain[2k+1])`.
fn bell_pairs(c: &mut Circuit, chain: &[usize]) {
    for p in chain.chunks(2) {
        c.h(p[0]);
    }
    for p in chain.chunks(2) {
        c.cnot(p[0], p[1]);
    }
}

/// Bell measurements on each `(first, second)` pair: CNOT, H on the first,
/// then Z measurements. Returns the bits that select Z and X corrections.
fn bell_measurements(c: &mut Circuit, pairs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    for &(p, q) in pairs {
        c.cnot(p, q);
    }
    for &(p, _) in pairs {
        c.h(p);
    }
    let mut z_bits = Vec::new();
    let mut x_bits = Vec::new();
    for &(p, q) in pairs {
        let zb = c.add_cbit();
        let xb = c.add_cbit();
        c.measure(p, zb).measure(q, xb);
        z_bits.push(zb);
        x_bits.push(xb);
    }
    (z_bits, x_bits)
}

fn corrections(out: usize, z_bits: &[usize], x_bits: &[usize]) -> CorrectionRule {
    let mut rule = CorrectionRule::default();
    rule.push(out, FramePauli::X, CondExpr::parity(x_bits));
    rule.push(out, FramePauli::Z, CondExpr::parity(z_bits));
    rule
}

/// Repeater-style teleportation of `input` to the last chain qubit, which
/// must be `output`. Bell pairs are prepared on consecutive chain pairs and
/// all Bell measurements run in parallel, so depth does not grow with the
/// chain.
pub fn build_teleport(
    input: usize,
    chain: &[usize],
    output: usize,
    topology: Option<&Topology>,
) -> Result<ProtocolCircuit, ProtocolError> {
    check_chain(chain, topology, Some(input))?;
    if chain.last() != Some(&output) {
        return Err(ProtocolError::InvalidAssignment(format!("output {output} must be the last chain qubit")));
    }
    let all: Vec<usize> = std::iter::once(input).chain(chain.iter().copied()).collect();
    let mut body = Circuit::new(width(&all), 0);
    bell_pairs(&mut body, chain);
    let pairs: Vec<(usize, usize)> = all[..all.len() - 1].chunks(2).map(|p| (p[0], p[1])).collect();
    let (z_bits, x_bits) = bell_measurements(&mut body, &pairs);
    Ok(ProtocolCircuit {
        name: "teleport".into(),
        body,
        rule: corrections(output, &z_bits, &x_bits),
        inputs: vec![input],
        outputs: vec![output],
        input_slot: 0,
        ideal: Ideal::Unitary(Vec::new()),
    })
}

/// Entanglement swapping along `chain`, leaving the two end qubits in the
/// Bell state selected by `input_bits`: bit 0 prepares the first chain qubit
/// in `|1⟩`, bit 1 the last.
pub fn build_entanglement_swap(
    chain: &[usize],
    input_bits: [bool; 2],
    topology: Option<&Topology>,
) -> Result<ProtocolCircuit, ProtocolError> {
    check_chain(chain, topology, None)?;
    let (first, last) = (chain[0], chain[chain.len() - 1]);
    let mut body = Circuit::new(width(chain), 0);
    if input_bits[0] {
        body.x(first);
    }
    if input_bits[1] {
        body.x(last);
    }
    bell_pairs(&mut body, chain);
    let pairs: Vec<(usize, usize)> = chain[1..chain.len() - 1].chunks(2).map(|p| (p[0], p[1])).collect();
    let (z_bits, x_bits) = bell_measurements(&mut body, &pairs);
    let target = BellState::from_input(input_bits);
    Ok(ProtocolCircuit {
        name: format!("swap_{}{}", input_bits[0] as u8, input_bits[1] as u8),
        body,
        rule: corrections(last, &z_bits, &x_bits),
        inputs: vec![first, last],
        outputs: vec![first, last],
        input_slot: 0,
        ideal: Ideal::State(target.state()),
    })
}
