use super::verify::{choi_circuit, ideal_choi, min_fidelity};
use super::{check_distinct, width, CorrectionRule, FramePauli, GhzPlan, Ideal, ProtocolCircuit, ProtocolError};
use crate::circuit::{Circuit, CondExpr, Gate, GateOp, Topology};
use crate::engine::enumerate_branches;

/// Qubit roles for the constant-depth fan-out.
///
/// `resource` holds the `N + 1` qubits of the GHZ resource; `resource[0]`
/// couples to the control and `resource[i + 1]` to `targets[i]`. The GHZ
/// resource is prepared through `prep_ancillas` (one between each pair of
/// resource qubits). With `reuse_reset` the prep ancillas are reset after
/// their measurement and may then serve as targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanoutLayout {
    pub control: usize,
    pub targets: Vec<usize>,
    pub resource: Vec<usize>,
    pub prep_ancillas: Vec<usize>,
    pub reuse_reset: bool,
}

impl FanoutLayout {
    /// Recycling layout on a ring of at least `2N + 2` qubits: control 0,
    /// resource on odd qubits, prep ancillas on even qubits, which are then
    /// reset and reused as targets.
    pub fn ring(n_targets: usize) -> Self {
        Self {
            control: 0,
            targets: (1..=n_targets).map(|i| 2 * i).collect(),
            resource: (0..=n_targets).map(|i| 2 * i + 1).collect(),
            prep_ancillas: (1..=n_targets).map(|i| 2 * i).collect(),
            reuse_reset: true,
        }
    }

    /// Separate qubits for every role.
    pub fn fresh(n_targets: usize) -> Self {
        let n = n_targets;
        Self {
            control: 0,
            targets: (1..=n).collect(),
            resource: (n + 1..=2 * n + 1).collect(),
            prep_ancillas: (2 * n + 2..=3 * n + 1).collect(),
            reuse_reset: false,
        }
    }

    /// The ring layout while it fits the 8-qubit device, fresh qubits beyond.
    pub fn standard(n_targets: usize) -> Self {
        if n_targets <= 3 {
            Self::ring(n_targets)
        } else {
            Self::fresh(n_targets)
        }
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn check(&self, topology: Option<&Topology>) -> Result<(), ProtocolError> {
        let n = self.targets.len();
        if n == 0 {
            return Err(ProtocolError::SizeMismatch { expected: 1, found: 0 });
        }
        if self.resource.len() != n + 1 {
            return Err(ProtocolError::SizeMismatch { expected: n + 1, found: self.resource.len() });
        }
        if self.prep_ancillas.len() != n {
            return Err(ProtocolError::SizeMismatch { expected: n, found: self.prep_ancillas.len() });
        }
        let data: Vec<usize> = std::iter::once(self.control).chain(self.targets.iter().copied()).collect();
        check_distinct(&[data.as_slice(), &self.resource].concat())?;
        check_distinct(&[&[self.control][..], &self.resource, &self.prep_ancillas].concat())?;
        if !self.reuse_reset {
            check_distinct(&[data.as_slice(), &self.prep_ancillas].concat())?;
        }
        self.plan().check(topology)?;
        if let Some(t) = topology {
            let pairs = std::iter::once((self.control, self.resource[0]))
                .chain(self.targets.iter().zip(&self.resource[1..]).map(|(&t, &r)| (t, r)));
            for (p, q) in pairs {
                if !t.adjacent(p, q) {
                    return Err(ProtocolError::InvalidAssignment(format!("qubits {p} and {q} are not coupled")));
                }
            }
        }
        Ok(())
    }

    fn plan(&self) -> GhzPlan {
        GhzPlan::new(self.resource.clone(), self.prep_ancillas.clone())
    }

    fn ideal(&self) -> Vec<GateOp> {
        (1..=self.targets.len()).map(|i| GateOp::two(Gate::Cnot, 0, i)).collect()
    }
}

/// Fan-out circuit without corrections. Classical bits: prep ancillas
/// `0..N`, the Z measurement of `resource[0]` at `N`, then the X
/// measurements of `resource[1..]`.
pub fn fanout_body(layout: &FanoutLayout, topology: Option<&Topology>) -> Result<ProtocolCircuit, ProtocolError> {
    layout.check(topology)?;
    let n = layout.num_targets();
    let all = [&[layout.control][..], &layout.targets, &layout.resource, &layout.prep_ancillas].concat();
    let mut body = Circuit::new(width(&all), n);
    let plan = layout.plan();
    plan.append_body(&mut body);
    if layout.reuse_reset {
        for &a in &layout.prep_ancillas {
            body.reset(a);
        }
    }
    let input_slot = body.instructions.len();
    body.cnot(layout.control, layout.resource[0]);
    for (&t, &r) in layout.targets.iter().zip(&layout.resource[1..]) {
        body.cnot(r, t);
    }
    let za = body.add_cbit();
    body.measure(layout.resource[0], za);
    for &r in &layout.resource[1..] {
        let b = body.add_cbit();
        body.measure_x(r, b);
    }
    let data: Vec<usize> = std::iter::once(layout.control).chain(layout.targets.iter().copied()).collect();
    Ok(ProtocolCircuit {
        name: format!("fanout{n}"),
        body,
        rule: CorrectionRule::default(),
        inputs: data.clone(),
        outputs: data,
        input_slot,
        ideal: Ideal::Unitary(layout.ideal()),
    })
}

fn parity(reg: u64, mask: u64) -> bool {
    (reg & mask).count_ones() % 2 == 1
}

/// Smallest subset of `sources` whose parity equals `required` on every
/// branch.
fn solve_parity(sources: &[usize], samples: &[(u64, bool)]) -> Option<Vec<usize>> {
    let mut subsets: Vec<u64> = (0..1u64 << sources.len()).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    subsets.into_iter().find_map(|s| {
        let chosen: Vec<usize> = sources.iter().enumerate().filter(|(i, _)| (s >> i) & 1 == 1).map(|(_, &b)| b).collect();
        let mask: u64 = chosen.iter().map(|b| 1u64 << b).sum();
        samples.iter().all(|&(reg, want)| parity(reg, mask) == want).then_some(chosen)
    })
}

/// Derives the fan-out decoder by brute force against the branch oracle.
///
/// For each branch of the uncorrected circuit, every candidate frame (X on
/// any subset of targets, Z on the control or not) is tried on the Choi
/// state until one restores the ideal action. Each correction is then
/// matched to the smallest parity of candidate source bits that agrees on
/// all branches: Z-basis outcomes for target X corrections, X-basis
/// outcomes for the control Z correction. The assembled rule is checked
/// branch by branch before it is returned.
pub fn derive_fanout_rule_for(layout: &FanoutLayout) -> Result<CorrectionRule, ProtocolError> {
    let body = fanout_body(layout, None)?;
    let n = layout.num_targets();
    let (ext, keep) = choi_circuit(&body, &body.body);
    let target = ideal_choi(n + 1, &layout.ideal())?;
    let branches = enumerate_branches(&ext)?;

    let mut needed: Vec<(u64, u64)> = Vec::with_capacity(branches.len());
    for b in &branches {
        let found = (0..1u64 << (n + 1)).find(|&cand| {
            let mut s = b.state.clone();
            if (cand >> n) & 1 == 1 {
                s.apply_gate(Gate::Z, &[layout.control]).expect("control in range");
            }
            for (i, &t) in layout.targets.iter().enumerate() {
                if (cand >> i) & 1 == 1 {
                    s.apply_gate(Gate::X, &[t]).expect("target in range");
                }
            }
            s.fidelity_reduced(&keep, &target).map_or(false, |f| f > 1.0 - 1e-9)
        });
        match found {
            Some(cand) => needed.push((b.cbits.bits, cand)),
            None => return Err(ProtocolError::NoRule(format!("branch {} has no Pauli fix", b.cbits))),
        }
    }

    let z_sources: Vec<usize> = (0..=n).collect();
    let x_sources: Vec<usize> = (n + 1..=2 * n).collect();
    let mut rule = CorrectionRule::default();
    for (i, &t) in layout.targets.iter().enumerate() {
        let samples: Vec<(u64, bool)> = needed.iter().map(|&(reg, c)| (reg, (c >> i) & 1 == 1)).collect();
        let bits = solve_parity(&z_sources, &samples)
            .ok_or_else(|| ProtocolError::NoRule(format!("no parity of Z outcomes fixes target {t}")))?;
        rule.push(t, FramePauli::X, CondExpr::parity(&bits));
    }
    let samples: Vec<(u64, bool)> = needed.iter().map(|&(reg, c)| (reg, (c >> n) & 1 == 1)).collect();
    let bits = solve_parity(&x_sources, &samples)
        .ok_or_else(|| ProtocolError::NoRule("no parity of X outcomes fixes the control".into()))?;
    rule.push(layout.control, FramePauli::Z, CondExpr::parity(&bits));

    let candidate = ProtocolCircuit { rule: rule.clone(), ..body };
    let worst = min_fidelity(&candidate.verify()?);
    if worst < 1.0 - 1e-9 {
        return Err(ProtocolError::NoRule(format!("assembled rule reaches only fidelity {worst}")));
    }
    Ok(rule)
}

/// Derived decoder for `n_targets` targets on [`FanoutLayout::standard`].
pub fn derive_fanout_rule(n_targets: usize) -> Result<CorrectionRule, ProtocolError> {
    derive_fanout_rule_for(&FanoutLayout::standard(n_targets))
}

/// Constant-depth fan-out (control-X on every target) with the derived
/// decoder.
pub fn build_fanout(layout: &FanoutLayout, topology: Option<&Topology>) -> Result<ProtocolCircuit, ProtocolError> {
    let body = fanout_body(layout, topology)?;
    let rule = derive_fanout_rule_for(layout)?;
    Ok(ProtocolCircuit { rule, ..body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::PureState;

    #[test]
    fn ring_layouts_fit_the_device() {
        let ring = Topology::ring(8);
        for n in 1..=3 {
            let pc = build_fanout(&FanoutLayout::ring(n), Some(&ring)).unwrap();
            assert!(crate::circuit::validate(&pc.circuit(), Some(&ring)).is_empty());
        }
    }

    #[test]
    fn derived_rule_has_expected_shape() {
        let rule = derive_fanout_rule(2).unwrap();
        // Targets: Z outcome of resource[0] plus the GHZ domain-wall prefix.
        assert_eq!(rule.corrections[0].when, CondExpr::parity(&[0, 2]));
        assert_eq!(rule.corrections[1].when, CondExpr::parity(&[0, 1, 2]));
        assert_eq!(rule.corrections[2].when, CondExpr::parity(&[3, 4]));
        assert_eq!(rule.corrections[2].pauli, FramePauli::Z);
    }

    #[test]
    fn one_hot_input_fans_out() {
        let pc = build_fanout(&FanoutLayout::ring(2), None).unwrap().with_basis_input(0b001);
        for b in enumerate_branches(&pc.circuit()).unwrap() {
            let want = PureState::basis(3, 0b111).unwrap();
            assert!(b.state.fidelity_reduced(&[0, 2, 4], &want).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn fresh_layout_also_works() {
        let pc = build_fanout(&FanoutLayout::fresh(2), None).unwrap();
        assert!(min_fidelity(&pc.verify().unwrap()) > 1.0 - 1e-9);
        assert!(pc.uncorrected_min_fidelity().unwrap() < 0.5);
    }

    #[test]
    fn bad_layouts() {
        let mut l = FanoutLayout::ring(2);
        l.reuse_reset = false;
        assert!(fanout_body(&l, None).is_err());
        let mut l = FanoutLayout::ring(2);
        l.resource.pop();
        assert!(matches!(fanout_body(&l, None), Err(ProtocolError::SizeMismatch { .. })));
    }
}
