use super::gates::apply_gate_vec;
use super::{EngineError, PauliString, PureState};
use crate::circuit::Gate;
use crate::linalg::{apply_matrix, Matrix, ONE, ZERO};
use crate::noise::KrausChannel;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const MAX_DENSITY_QUBITS: usize = 10;

/// Density matrix over `n` qubits, stored as a `4^n` vector with entry
/// `(r, c)` at index `r << n | c`. Gates act on the row bits with `U` and on
/// the column bits with `conj(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn new(n: usize) -> Result<Self, EngineError> {
        if n > MAX_DENSITY_QUBITS {
            return Err(EngineError::TooManyQubits { n, limit: MAX_DENSITY_QUBITS });
        }
        let mut data = vec![ZERO; 1 << (2 * n)];
        data[0] = ONE;
        Ok(Self { n, data })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let n = psi.num_qubits();
        let a = psi.amplitudes();
        let mut data = Vec::with_capacity(a.len() * a.len());
        for r in a {
            for c in a {
                data.push(r * c.conj());
            }
        }
        Self { n, data }
    }

    pub fn from_matrix(m: Matrix) -> Result<Self, EngineError> {
        let dim = m.dim();
        if !dim.is_power_of_two() {
            return Err(EngineError::DimensionMismatch { expected: dim.next_power_of_two(), found: dim });
        }
        let n = dim.trailing_zeros() as usize;
        Ok(Self { n, data: m.data().to_vec() })
    }

    pub fn to_matrix(&self) -> Matrix {
        let dim = 1 << self.n;
        let mut m = Matrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = self.entry(r, c);
            }
        }
        m
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.data[(r << self.n) | c]
    }

    pub fn trace(&self) -> f64 {
        (0..1usize << self.n).map(|i| self.entry(i, i).re).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn normalize(&mut self) {
        let t = self.trace();
        if t > 0.0 {
            self.scale(1.0 / t);
        }
    }

    fn check(&self, qubits: &[usize]) -> Result<(), EngineError> {
        match qubits.iter().find(|&&q| q >= self.n) {
            Some(&q) => Err(EngineError::QubitOutOfRange { qubit: q, num_qubits: self.n }),
            None => Ok(()),
        }
    }

    fn row_bits(&self, qubits: &[usize]) -> Vec<usize> {
        qubits.iter().map(|q| q + self.n).collect()
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), EngineError> {
        self.check(qubits)?;
        if qubits.len() != gate.arity() {
            return Err(EngineError::Arity { gate: gate.name(), found: qubits.len() });
        }
        let rows = self.row_bits(qubits);
        apply_gate_vec(&mut self.data, gate, &rows, false);
        apply_gate_vec(&mut self.data, gate, qubits, true);
        Ok(())
    }

    /// `K rho K^dag` for one operator.
    pub fn conjugate_by(&mut self, k: &Matrix, qubits: &[usize]) -> Result<(), EngineError> {
        self.check(qubits)?;
        let rows = self.row_bits(qubits);
        apply_matrix(&mut self.data, k, &rows);
        apply_matrix(&mut self.data, &k.conj(), qubits);
        Ok(())
    }

    /// `sum_i K_i rho K_i^dag`.
    pub fn apply_channel(&mut self, channel: &KrausChannel, qubits: &[usize]) -> Result<(), EngineError> {
        self.check(qubits)?;
        if channel.is_identity() {
            return Ok(());
        }
        let mut acc = vec![ZERO; self.data.len()];
        for k in &channel.ops {
            let mut term = self.clone();
            term.conjugate_by(k, qubits)?;
            for (a, b) in acc.iter_mut().zip(&term.data) {
                *a += b;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// `P rho P` for the projector onto `outcome` of qubit `q`, without
    /// renormalizing. Returns the remaining trace.
    pub fn project_unnormalized(&mut self, q: usize, outcome: bool) -> f64 {
        let row_bit = 1usize << (q + self.n);
        let col_bit = 1usize << q;
        for (i, v) in self.data.iter_mut().enumerate() {
            if ((i & row_bit) != 0) != outcome || ((i & col_bit) != 0) != outcome {
                *v = ZERO;
            }
        }
        self.trace()
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        (0..1usize << self.n).filter(|i| i & bit != 0).map(|i| self.entry(i, i).re).sum()
    }

    /// `Tr(P rho)`.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64, EngineError> {
        if pauli.num_qubits != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: pauli.num_qubits });
        }
        let (phase, x, z) = pauli.action();
        let mut acc = ZERO;
        for j in 0..1usize << self.n {
            let sign = if (j & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.entry(j, j ^ x) * sign;
        }
        Ok((acc * phase).re)
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_pure(&self, psi: &PureState) -> Result<f64, EngineError> {
        if psi.num_qubits() != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: psi.num_qubits() });
        }
        let a = psi.amplitudes();
        let mut acc = ZERO;
        for (r, ar) in a.iter().enumerate() {
            if *ar == ZERO {
                continue;
            }
            let mut row = ZERO;
            for (c, ac) in a.iter().enumerate() {
                row += self.entry(r, c) * ac;
            }
            acc += ar.conj() * row;
        }
        Ok(acc.re)
    }

    /// Reduced state of `keep`; output qubit `j` is `keep[j]`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, EngineError> {
        self.check(keep)?;
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let spread = |bits: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().map(|(j, &q)| ((bits >> j) & 1) << q).sum()
        };
        let dim = 1usize << keep.len();
        let kept_idx: Vec<usize> = (0..dim).map(|b| spread(b, keep)).collect();
        let mut m = Matrix::zeros(dim);
        for t in 0..1usize << traced.len() {
            let base = spread(t, &traced);
            for (r, &ri) in kept_idx.iter().enumerate() {
                for (c, &ci) in kept_idx.iter().enumerate() {
                    m[(r, c)] += self.entry(base | ri, base | ci);
                }
            }
        }
        DensityMatrix::from_matrix(m)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.n;
        DMatrix::from_fn(dim, dim, |r, c| self.entry(r, c))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `0.5 * ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, EngineError> {
        if other.n != self.n {
            return Err(EngineError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut diff = self.clone();
        for (a, b) in diff.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = 1usize << self.n;
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::mcm_spectator_channel;

    #[test]
    fn gate_conjugation_matches_pure() {
        let mut psi = PureState::new(3).unwrap();
        let mut rho = DensityMatrix::new(3).unwrap();
        for (g, q) in [(Gate::H, vec![0]), (Gate::Cnot, vec![0, 2]), (Gate::Ry(0.4), vec![1]), (Gate::S, vec![2])] {
            psi.apply_gate(g, &q).unwrap();
            rho.apply_gate(g, &q).unwrap();
        }
        let d = rho.trace_distance(&psi.to_density()).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn dephased_x_is_zero() {
        let mut rho = DensityMatrix::new(1).unwrap();
        rho.apply_gate(Gate::H, &[0]).unwrap();
        rho.apply_channel(&mcm_spectator_channel(0.5, false, 1.0), &[0]).unwrap();
        assert!(rho.expectation(&"X".parse().unwrap()).unwrap().abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut psi = PureState::new(2).unwrap();
        psi.apply_gate(Gate::X, &[1]).unwrap();
        let r = psi.to_density().partial_trace(&[1]).unwrap();
        assert!((r.entry(1, 1).re - 1.0).abs() < 1e-15);
        let ev = psi.to_density().eigenvalues();
        assert!((ev[3] - 1.0).abs() < 1e-12 && ev[0].abs() < 1e-12);
    }
}
