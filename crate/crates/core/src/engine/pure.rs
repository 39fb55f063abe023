use super::gates::apply_gate_vec;
use super::{DensityMatrix, EngineError, PauliString};
use crate::circuit::Gate;
use crate::linalg::{apply_matrix, Matrix, ONE, ZERO};
use crate::noise::KrausChannel;
use num_complex::Complex64;
use rand::Rng;

pub const MAX_PURE_QUBITS: usize = 20;

/// State vector over `n` qubits; qubit 0 is the least-significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// `|0...0>`.
    pub fn new(n: usize) -> Result<Self, EngineError> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self, EngineError> {
        if n > MAX_PURE_QUBITS {
            return Err(EngineError::TooManyQubits { n, limit: MAX_PURE_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(Self { n, amps })
    }

    /// Wraps amplitudes; the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, EngineError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(EngineError::DimensionMismatch { expected: len.next_power_of_two(), found: len });
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_PURE_QUBITS {
            return Err(EngineError::TooManyQubits { n, limit: MAX_PURE_QUBITS });
        }
        let s = Self { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(EngineError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// `(|0...0> + |1...1>)/sqrt(2)`.
    pub fn ghz(n: usize) -> Self {
        let mut s = Self::new(n).expect("ghz width within limits");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        s.amps[0] = Complex64::new(h, 0.0);
        s.amps[(1 << n) - 1] = Complex64::new(h, 0.0);
        s
    }

    /// Tensor product with `self` on the low qubits.
    pub fn tensor(&self, high: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amps.len() * high.amps.len());
        for &b in &high.amps {
            for &a in &self.amps {
                amps.push(a * b);
            }
        }
        PureState { n: self.n + high.n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, qubits: &[usize]) -> Result<(), EngineError> {
        match qubits.iter().find(|&&q| q >= self.n) {
            Some(&q) => Err(EngineError::QubitOutOfRange { qubit: q, num_qubits: self.n }),
            None => Ok(()),
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), EngineError> {
        self.check(qubits)?;
        if qubits.len() != gate.arity() {
            return Err(EngineError::Arity { gate: gate.name(), found: qubits.len() });
        }
        apply_gate_vec(&mut self.amps, gate, qubits, false);
        Ok(())
    }

    /// Applies an arbitrary (not necessarily unitary) matrix; `qubits[0]` is
    /// the least-significant bit of the matrix index.
    pub fn apply_matrix(&mut self, m: &Matrix, qubits: &[usize]) -> Result<(), EngineError> {
        self.check(qubits)?;
        if m.dim() != 1 << qubits.len() {
            return Err(EngineError::DimensionMismatch { expected: 1 << qubits.len(), found: m.dim() });
        }
        apply_matrix(&mut self.amps, m, qubits);
        Ok(())
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes. Returns the
    /// probability of the outcome; the state is left untouched when it is 0.
    pub fn project(&mut self, q: usize, outcome: bool) -> f64 {
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p <= 0.0 {
            return 0.0;
        }
        let bit = 1usize << q;
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        p
    }

    /// Born-rule measurement of qubit `q` in the Z basis.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, EngineError> {
        self.check(&[q])?;
        let outcome = rng.gen::<f64>() < self.prob_one(q);
        self.project(q, outcome);
        Ok(outcome)
    }

    /// Applies one Kraus operator chosen with its Born weight.
    pub fn apply_channel_sampled<R: Rng + ?Sized>(
        &mut self,
        channel: &KrausChannel,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<(), EngineError> {
        self.check(qubits)?;
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let last = channel.ops.len() - 1;
        for (i, k) in channel.ops.iter().enumerate() {
            let mut trial = self.amps.clone();
            apply_matrix(&mut trial, k, qubits);
            let p: f64 = trial.iter().map(|a| a.norm_sqr()).sum();
            acc += p;
            if (r < acc || i == last) && p > 0.0 {
                let scale = 1.0 / p.sqrt();
                self.amps = trial.into_iter().map(|a| a * scale).collect();
                return Ok(());
            }
        }
        Ok(())
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64, EngineError> {
        if pauli.num_qubits != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: pauli.num_qubits });
        }
        let (phase, x, z) = pauli.action();
        let mut acc = ZERO;
        for (k, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let sign = if (k & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[k ^ x].conj() * a * sign;
        }
        Ok((acc * phase).re)
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64, EngineError> {
        if other.n != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<other|self>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64, EngineError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `⟨t|ρ_keep|t⟩` for the reduced state on `keep` (qubit `j` of `target`
    /// is `keep[j]`), without forming the reduced matrix.
    pub fn fidelity_reduced(&self, keep: &[usize], target: &PureState) -> Result<f64, EngineError> {
        self.check(keep)?;
        if target.n != keep.len() {
            return Err(EngineError::DimensionMismatch { expected: keep.len(), found: target.n });
        }
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let spread = |bits: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().map(|(j, &q)| ((bits >> j) & 1) << q).sum()
        };
        let kept_idx: Vec<usize> = (0..1usize << keep.len()).map(|b| spread(b, keep)).collect();
        let mut total = 0.0;
        for t in 0..1usize << traced.len() {
            let base = spread(t, &traced);
            let overlap: Complex64 =
                kept_idx.iter().zip(&target.amps).map(|(&k, tk)| tk.conj() * self.amps[base | k]).sum();
            total += overlap.norm_sqr();
        }
        Ok(total)
    }

    /// Reduced density matrix of `keep`; output qubit `j` is `keep[j]`.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix, EngineError> {
        self.check(keep)?;
        let k = keep.len();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let spread = |bits: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().map(|(j, &q)| ((bits >> j) & 1) << q).sum()
        };
        let dim = 1usize << k;
        let kept_idx: Vec<usize> = (0..dim).map(|b| spread(b, keep)).collect();
        let mut rho = Matrix::zeros(dim);
        for t in 0..1usize << traced.len() {
            let base = spread(t, &traced);
            for (r, &ri) in kept_idx.iter().enumerate() {
                let a = self.amps[base | ri];
                if a == ZERO {
                    continue;
                }
                for (col, &ci) in kept_idx.iter().enumerate() {
                    rho[(r, col)] += a * self.amps[base | ci].conj();
                }
            }
        }
        DensityMatrix::from_matrix(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn h_on_zero() {
        let mut s = PureState::new(1).unwrap();
        s.apply_gate(Gate::H, &[0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15 && (s.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn cnot_on_10() {
        // |10> in the printed order: qubit 0 is 1.
        let mut s = PureState::basis(2, 0b01).unwrap();
        s.apply_gate(Gate::Cnot, &[0, 1]).unwrap();
        assert_eq!(s.amplitudes()[0b11], ONE);
    }

    #[test]
    fn bell_measurement_collapses() {
        let mut s = PureState::new(2).unwrap();
        s.apply_gate(Gate::H, &[0]).unwrap();
        s.apply_gate(Gate::Cnot, &[0, 1]).unwrap();
        let p = s.project(0, false);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((s.amplitudes()[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn measure_one_is_deterministic() {
        let mut s = PureState::basis(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(s.measure(0, &mut rng).unwrap());
        }
    }

    #[test]
    fn expectations() {
        let z = PauliString::single(1, 0, 'Z');
        assert_eq!(PureState::new(1).unwrap().expectation(&z).unwrap(), 1.0);
        let bell = PureState::ghz(2);
        assert!((bell.expectation(&"XX".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((bell.expectation(&"YY".parse().unwrap()).unwrap() + 1.0).abs() < 1e-12);
        let mut s = PureState::new(1).unwrap();
        s.apply_gate(Gate::H, &[0]).unwrap();
        s.apply_gate(Gate::S, &[0]).unwrap();
        assert!((s.expectation(&"Y".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelities() {
        let zero = PureState::new(1).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let mut plus = zero.clone();
        plus.apply_gate(Gate::H, &[0]).unwrap();
        assert_eq!(zero.fidelity(&zero).unwrap(), 1.0);
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert!((plus.fidelity(&zero).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reduced_bell_is_mixed() {
        let rho = PureState::ghz(2).reduced(&[1]).unwrap();
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!(rho.entry(0, 1).norm() < 1e-15);
    }
}
