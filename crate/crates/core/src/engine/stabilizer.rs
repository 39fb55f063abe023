use super::{Clbits, EngineError, PauliString};
use crate::circuit::{quarter_turns, validate, Basis, Circuit, Gate, Instruction};
use rand::Rng;

/// Aaronson-Gottesman tableau: rows `0..n` are destabilizers, `n..2n`
/// stabilizers, and row `2n` is scratch space. Each row stores x and z bit
/// masks plus a sign bit, so at most 64 qubits are supported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

pub const MAX_STABILIZER_QUBITS: usize = 64;

/// Exponent of i picked up when multiplying single-qubit Paulis
/// `(x1, z1) * (x2, z2)`.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl StabilizerTableau {
    /// Tableau of `|0...0>`.
    pub fn new(n: usize) -> Result<Self, EngineError> {
        if n > MAX_STABILIZER_QUBITS {
            return Err(EngineError::TooManyQubits { n, limit: MAX_STABILIZER_QUBITS });
        }
        let mut t = Self { n, x: vec![0; 2 * n + 1], z: vec![0; 2 * n + 1], r: vec![false; 2 * n + 1] };
        for i in 0..n {
            t.x[i] = 1 << i;
            t.z[n + i] = 1 << i;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Stabilizer generators with their signs.
    pub fn stabilizers(&self) -> Vec<(bool, PauliString)> {
        (self.n..2 * self.n)
            .map(|i| (self.r[i], PauliString { num_qubits: self.n, x: self.x[i], z: self.z[i] }))
            .collect()
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            let bit = |v: u64| (v >> j) & 1 == 1;
            sum += g(bit(self.x[i]), bit(self.z[i]), bit(self.x[h]), bit(self.z[h]));
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let xa = (self.x[i] >> a) & 1;
            let za = (self.z[i] >> a) & 1;
            self.r[i] ^= xa & za == 1;
            self.x[i] = (self.x[i] & !(1 << a)) | (za << a);
            self.z[i] = (self.z[i] & !(1 << a)) | (xa << a);
        }
    }

    fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let xa = (self.x[i] >> a) & 1;
            let za = (self.z[i] >> a) & 1;
            self.r[i] ^= xa & za == 1;
            self.z[i] ^= xa << a;
        }
    }

    fn cnot(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            let xa = (self.x[i] >> a) & 1;
            let za = (self.z[i] >> a) & 1;
            let xb = (self.x[i] >> b) & 1;
            let zb = (self.z[i] >> b) & 1;
            self.r[i] ^= xa & zb & (xb ^ za ^ 1) == 1;
            self.x[i] ^= xa << b;
            self.z[i] ^= zb << a;
        }
    }

    fn pauli_sign(&mut self, a: usize, flip_on_x: bool, flip_on_z: bool) {
        for i in 0..2 * self.n {
            let xa = (self.x[i] >> a) & 1 == 1;
            let za = (self.z[i] >> a) & 1 == 1;
            self.r[i] ^= (flip_on_x && xa) ^ (flip_on_z && za);
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), EngineError> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n) {
            return Err(EngineError::QubitOutOfRange { qubit: q, num_qubits: self.n });
        }
        if qubits.len() != gate.arity() {
            return Err(EngineError::Arity { gate: gate.name(), found: qubits.len() });
        }
        let a = qubits[0];
        match gate {
            Gate::I => {}
            // X anticommutes with Z components, Z with X components.
            Gate::X => self.pauli_sign(a, false, true),
            Gate::Z => self.pauli_sign(a, true, false),
            Gate::Y => self.pauli_sign(a, true, true),
            Gate::H => self.h(a),
            Gate::S => self.s(a),
            Gate::Sdg => {
                self.s(a);
                self.s(a);
                self.s(a);
            }
            Gate::Rz(t) | Gate::Rx(t) | Gate::Ry(t) => {
                let k = quarter_turns(t).ok_or(EngineError::UnsupportedGate { gate: format!("{}({t})", gate.name()) })?;
                for _ in 0..k {
                    match gate {
                        Gate::Rz(_) => self.s(a),
                        Gate::Rx(_) => {
                            self.h(a);
                            self.s(a);
                            self.h(a);
                        }
                        _ => {
                            // RY(pi/2) equals X.H up to global phase.
                            self.h(a);
                            self.pauli_sign(a, false, true);
                        }
                    }
                }
            }
            Gate::Cnot => self.cnot(a, qubits[1]),
            Gate::Cz => {
                self.h(qubits[1]);
                self.cnot(a, qubits[1]);
                self.h(qubits[1]);
            }
        }
        Ok(())
    }

    /// Z-basis measurement of qubit `a`. Deterministic outcomes consume no
    /// randomness.
    pub fn measure<R: Rng + ?Sized>(&mut self, a: usize, rng: &mut R) -> Result<bool, EngineError> {
        if a >= self.n {
            return Err(EngineError::QubitOutOfRange { qubit: a, num_qubits: self.n });
        }
        let n = self.n;
        let bit = 1u64 << a;
        if let Some(p) = (n..2 * n).find(|&p| self.x[p] & bit != 0) {
            for i in 0..2 * n {
                if i != p && self.x[i] & bit != 0 {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            let outcome = rng.gen::<bool>();
            self.x[p] = 0;
            self.z[p] = bit;
            self.r[p] = outcome;
            Ok(outcome)
        } else {
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = false;
            for i in 0..n {
                if self.x[i] & bit != 0 {
                    self.rowsum(s, i + n);
                }
            }
            Ok(self.r[s])
        }
    }

    /// `<P>` for a stabilizer state: +1 or -1 when `±P` is in the stabilizer
    /// group, 0 otherwise.
    pub fn expectation(&mut self, pauli: &PauliString) -> Result<i8, EngineError> {
        if pauli.num_qubits != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: pauli.num_qubits });
        }
        let n = self.n;
        let probe = PauliString { num_qubits: n, x: 0, z: 0 };
        for i in n..2 * n {
            let row = PauliString { x: self.x[i], z: self.z[i], ..probe };
            if !row.commutes_with(pauli) {
                return Ok(0);
            }
        }
        let s = 2 * n;
        self.x[s] = 0;
        self.z[s] = 0;
        self.r[s] = false;
        for i in 0..n {
            let destab = PauliString { x: self.x[i], z: self.z[i], ..probe };
            if !destab.commutes_with(pauli) {
                self.rowsum(s, i + n);
            }
        }
        debug_assert!(self.x[s] == pauli.x && self.z[s] == pauli.z);
        Ok(if self.r[s] { -1 } else { 1 })
    }

    /// Checks that stabilizers pairwise commute, destabilizer `i` anticommutes
    /// only with stabilizer `i`, and destabilizers pairwise commute.
    pub fn is_consistent(&self) -> bool {
        let n = self.n;
        let row = |i: usize| PauliString { num_qubits: n, x: self.x[i], z: self.z[i] };
        for i in 0..n {
            for j in 0..n {
                if !row(n + i).commutes_with(&row(n + j)) || !row(i).commutes_with(&row(j)) {
                    return false;
                }
                if row(i).commutes_with(&row(n + j)) == (i == j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Executes a Clifford circuit once on a tableau. X-basis measurements
/// rotate with H on both sides, resets measure and flip on outcome 1.
pub fn stabilizer_run<R: Rng + ?Sized>(
    circuit: &Circuit,
    rng: &mut R,
) -> Result<(Clbits, StabilizerTableau), EngineError> {
    if let Some(v) = validate(circuit, None).into_iter().next() {
        return Err(EngineError::InvalidCircuit(v));
    }
    if circuit.num_cbits > 64 {
        return Err(EngineError::TooManyCbits(circuit.num_cbits));
    }
    let mut t = StabilizerTableau::new(circuit.num_qubits)?;
    let mut reg: u64 = 0;
    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(op) => t.apply_gate(op.gate, &op.qubits)?,
            Instruction::Measure { qubit, cbit, basis } => {
                if *basis == Basis::X {
                    t.apply_gate(Gate::H, &[*qubit])?;
                }
                let m = t.measure(*qubit, rng)?;
                if *basis == Basis::X {
                    t.apply_gate(Gate::H, &[*qubit])?;
                }
                reg = (reg & !(1 << cbit)) | ((m as u64) << cbit);
            }
            Instruction::Reset { qubit } => {
                if t.measure(*qubit, rng)? {
                    t.apply_gate(Gate::X, &[*qubit])?;
                }
            }
            Instruction::Conditional { cond, ops } => {
                if cond.eval_packed(reg) {
                    for op in ops {
                        t.apply_gate(op.gate, &op.qubits)?;
                    }
                }
            }
            Instruction::Delay { .. } | Instruction::Barrier { .. } => {}
            Instruction::Noise(_) => return Err(EngineError::NoiseUnsupported { engine: "stabilizer" }),
        }
    }
    Ok((Clbits { bits: reg, width: circuit.num_cbits }, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn bell_correlations() {
        let mut t = StabilizerTableau::new(2).unwrap();
        t.apply_gate(Gate::H, &[0]).unwrap();
        t.apply_gate(Gate::Cnot, &[0, 1]).unwrap();
        assert_eq!(t.expectation(&"XX".parse().unwrap()).unwrap(), 1);
        assert_eq!(t.expectation(&"YY".parse().unwrap()).unwrap(), -1);
        assert_eq!(t.expectation(&"ZI".parse().unwrap()).unwrap(), 0);
        let mut r = rng();
        let a = t.measure(0, &mut r).unwrap();
        assert_eq!(t.measure(1, &mut r).unwrap(), a);
        assert!(t.is_consistent());
    }

    #[test]
    fn rotations_by_quarter_turns() {
        use std::f64::consts::FRAC_PI_2;
        let mut t = StabilizerTableau::new(1).unwrap();
        t.apply_gate(Gate::Ry(FRAC_PI_2), &[0]).unwrap();
        assert_eq!(t.expectation(&"X".parse().unwrap()).unwrap(), 1);
        t.apply_gate(Gate::Rz(FRAC_PI_2), &[0]).unwrap();
        assert_eq!(t.expectation(&"Y".parse().unwrap()).unwrap(), 1);
        t.apply_gate(Gate::Rx(FRAC_PI_2), &[0]).unwrap();
        assert_eq!(t.expectation(&"Z".parse().unwrap()).unwrap(), 1);
        assert!(matches!(
            t.apply_gate(Gate::Rz(std::f64::consts::PI / 3.0), &[0]),
            Err(EngineError::UnsupportedGate { .. })
        ));
    }

    #[test]
    fn y_and_sdg_signs() {
        let mut t = StabilizerTableau::new(1).unwrap();
        t.apply_gate(Gate::H, &[0]).unwrap();
        t.apply_gate(Gate::Sdg, &[0]).unwrap();
        assert_eq!(t.expectation(&"Y".parse().unwrap()).unwrap(), -1);
        t.apply_gate(Gate::Y, &[0]).unwrap();
        assert_eq!(t.expectation(&"Y".parse().unwrap()).unwrap(), -1);
        t.apply_gate(Gate::Z, &[0]).unwrap();
        assert_eq!(t.expectation(&"Y".parse().unwrap()).unwrap(), 1);
    }

    #[test]
    fn run_rejects_non_clifford() {
        let mut c = Circuit::new(1, 0);
        c.gate(Gate::Ry(0.3), &[0]);
        assert!(stabilizer_run(&c, &mut rng()).is_err());
        let mut c = Circuit::new(2, 1);
        c.h(0).gate(Gate::S, &[0]).cnot(0, 1).measure(1, 0);
        assert!(stabilizer_run(&c, &mut rng()).is_ok());
    }
}
