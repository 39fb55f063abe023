use super::{check_distinct, width, CorrectionRule, FramePauli, Ideal, ProtocolCircuit, ProtocolError};
use crate::circuit::{Circuit, CondExpr, Topology};
use crate::engine::PureState;

/// Placement for constant-depth GHZ preparation. Ancilla `k` sits between
/// data `k` and data `k + 1` and writes classical bit `cbits[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhzPlan {
    pub data: Vec<usize>,
    pub ancillas: Vec<usize>,
    pub cbits: Vec<usize>,
}

impl GhzPlan {
    pub fn new(data: Vec<usize>, ancillas: Vec<usize>) -> Self {
        let cbits = (0..ancillas.len()).collect();
        Self { data, ancillas, cbits }
    }

    /// Alternating data and ancillas on a line: data on even qubits.
    pub fn line(n: usize) -> Self {
        Self::new((0..n).map(|k| 2 * k).collect(), (0..n.saturating_sub(1)).map(|k| 2 * k + 1).collect())
    }

    /// Default placement on a ring of `ring_size` qubits, walking down from
    /// the highest index: data on `ring_size - 1 - 2k`, ancillas in between.
    pub fn ring(n: usize, ring_size: usize) -> Result<Self, ProtocolError> {
        if n < 2 || 2 * n - 1 > ring_size {
            return Err(ProtocolError::PlanMismatch(format!("{n} data qubits do not fit a ring of {ring_size}")));
        }
        let top = ring_size - 1;
        Ok(Self::new((0..n).map(|k| top - 2 * k).collect(), (0..n - 1).map(|k| top - 1 - 2 * k).collect()))
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn check(&self, topology: Option<&Topology>) -> Result<(), ProtocolError> {
        let n = self.data.len();
        if n < 2 {
            return Err(ProtocolError::PlanMismatch("at least two data qubits are required".into()));
        }
        if self.ancillas.len() != n - 1 || self.cbits.len() != n - 1 {
            return Err(ProtocolError::PlanMismatch(format!(
                "{n} data qubits need {} ancillas and classical bits, found {} and {}",
                n - 1,
                self.ancillas.len(),
                self.cbits.len()
            )));
        }
        check_distinct(&[self.data.as_slice(), &self.ancillas].concat())?;
        let mut bits = self.cbits.clone();
        bits.sort_unstable();
        bits.dedup();
        if bits.len() != self.cbits.len() {
            return Err(ProtocolError::PlanMismatch("classical bits must be distinct".into()));
        }
        if let Some(t) = topology {
            for (k, &a) in self.ancillas.iter().enumerate() {
                for d in [self.data[k], self.data[k + 1]] {
                    if !t.adjacent(a, d) {
                        return Err(ProtocolError::PlanMismatch(format!("ancilla {a} is not coupled to data {d}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Appends the entangling layers and ancilla measurements to `c`.
    pub(crate) fn append_body(&self, c: &mut Circuit) {
        for &d in &self.data {
            c.h(d);
        }
        for (k, &a) in self.ancillas.iter().enumerate() {
            c.cnot(self.data[k], a);
        }
        for (k, &a) in self.ancillas.iter().enumerate() {
            c.cnot(self.data[k + 1], a);
        }
        for (&a, &b) in self.ancillas.iter().zip(&self.cbits) {
            c.measure(a, b);
        }
    }

    /// X correction of data `k`: parity of the first `k` ancilla outcomes.
    pub(crate) fn flip_condition(&self, k: usize) -> CondExpr {
        CondExpr::parity(&self.cbits[..k])
    }
}

/// Prefix-XOR decoder: data qubit `k` is flipped when an odd number of
/// domain walls lie to its left.
pub fn decode_ghz(outcomes: &[bool]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(outcomes.len() + 1);
    let mut acc = false;
    mask.push(false);
    for &o in outcomes {
        acc ^= o;
        mask.push(acc);
    }
    mask
}

/// Constant-depth GHZ preparation: `|+⟩` on the data, two CNOT layers onto
/// the ancillas, ancilla MCMs and one layer of conditional X gates.
pub fn build_ghz_adaptive(plan: &GhzPlan, topology: Option<&Topology>) -> Result<ProtocolCircuit, ProtocolError> {
    plan.check(topology)?;
    let all = [plan.data.as_slice(), &plan.ancillas].concat();
    let num_cbits = plan.cbits.iter().max().map_or(0, |m| m + 1);
    let mut body = Circuit::new(width(&all), num_cbits);
    plan.append_body(&mut body);
    let mut rule = CorrectionRule::default();
    for (k, &d) in plan.data.iter().enumerate().skip(1) {
        rule.push(d, FramePauli::X, plan.flip_condition(k));
    }
    Ok(ProtocolCircuit {
        name: format!("ghz{}", plan.n()),
        body,
        rule,
        inputs: Vec::new(),
        outputs: plan.data.clone(),
        input_slot: 0,
        ideal: Ideal::State(PureState::ghz(plan.n())),
    })
}

/// Unitary baseline on the same placement: a nearest-neighbour CNOT chain
/// through data and ancillas, then one layer returning every ancilla to
/// `|0⟩`. Its depth grows linearly with `n`.
pub fn build_ghz_ladder(plan: &GhzPlan, topology: Option<&Topology>) -> Result<ProtocolCircuit, ProtocolError> {
    plan.check(topology)?;
    let mut chain = Vec::with_capacity(2 * plan.n() - 1);
    for (k, &d) in plan.data.iter().enumerate() {
        chain.push(d);
        if let Some(&a) = plan.ancillas.get(k) {
            chain.push(a);
        }
    }
    let mut body = Circuit::new(width(&chain), 0);
    body.h(chain[0]);
    for w in chain.windows(2) {
        body.cnot(w[0], w[1]);
    }
    for (k, &a) in plan.ancillas.iter().enumerate() {
        body.cnot(plan.data[k + 1], a);
    }
    Ok(ProtocolCircuit {
        name: format!("ghz{}_ladder", plan.n()),
        body,
        rule: CorrectionRule::default(),
        inputs: Vec::new(),
        outputs: plan.data.clone(),
        input_slot: 0,
        ideal: Ideal::State(PureState::ghz(plan.n())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::depth;

    #[test]
    fn decoder_is_prefix_xor() {
        assert_eq!(decode_ghz(&[false, false, false]), vec![false; 4]);
        assert_eq!(decode_ghz(&[true, false, false]), vec![false, true, true, true]);
        assert_eq!(decode_ghz(&[true, true]), vec![false, true, false]);
    }

    #[test]
    fn ring_plan_fits_ring() {
        let ring = Topology::ring(8);
        for n in 2..=4 {
            let plan = GhzPlan::ring(n, 8).unwrap();
            assert!(plan.check(Some(&ring)).is_ok());
        }
        assert!(GhzPlan::ring(5, 8).is_err());
        let bad = GhzPlan::new(vec![0, 4], vec![2]);
        assert!(bad.check(Some(&ring)).is_err());
    }

    #[test]
    fn every_branch_is_ghz() {
        for n in 2..=4 {
            let pc = build_ghz_adaptive(&GhzPlan::line(n), None).unwrap();
            let reports = pc.verify().unwrap();
            assert_eq!(reports.len(), 1 << (n - 1));
            for r in reports {
                assert!((r.probability - 1.0 / (1 << (n - 1)) as f64).abs() < 1e-12);
                assert!(r.fidelity > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn ladder_is_ghz_and_deeper() {
        for n in 2..=6 {
            let plan = GhzPlan::line(n);
            let ladder = build_ghz_ladder(&plan, None).unwrap();
            assert!(ladder.verify().unwrap()[0].fidelity > 1.0 - 1e-9);
            assert_eq!(depth(&ladder.circuit()), 2 * n);
            assert_eq!(depth(&build_ghz_adaptive(&plan, None).unwrap().circuit()), 5);
        }
    }
}
