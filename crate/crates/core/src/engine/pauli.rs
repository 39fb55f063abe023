use super::EngineError;
use crate::linalg::{c, Matrix, I, ONE, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Hermitian Pauli operator on up to 64 qubits. Character `i` of the text
/// form acts on qubit `i`; `Y` is stored as both the x and z bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub num_qubits: usize,
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        Self { num_qubits, x: 0, z: 0 }
    }

    /// Single-qubit Pauli `p` (one of `I`, `X`, `Y`, `Z`) on qubit `q`.
    pub fn single(num_qubits: usize, q: usize, p: char) -> Self {
        let mut s = Self::identity(num_qubits);
        s.set(q, p);
        s
    }

    /// Same Pauli on each listed qubit.
    pub fn on(num_qubits: usize, qubits: &[usize], p: char) -> Self {
        let mut s = Self::identity(num_qubits);
        for &q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn set(&mut self, q: usize, p: char) {
        let bit = 1u64 << q;
        self.x &= !bit;
        self.z &= !bit;
        match p.to_ascii_uppercase() {
            'X' => self.x |= bit,
            'Z' => self.z |= bit,
            'Y' => {
                self.x |= bit;
                self.z |= bit;
            }
            _ => {}
        }
    }

    pub fn get(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// `(i^{nY}, x-flip mask, z-sign mask)` such that
    /// `P|k> = i^{nY} (-1)^{popcount(k & zmask)} |k ^ xmask>`.
    pub(crate) fn action(&self) -> (Complex64, usize, usize) {
        let phase = match (self.x & self.z).count_ones() % 4 {
            0 => ONE,
            1 => I,
            2 => c(-1.0, 0.0),
            _ => -I,
        };
        (phase, self.x as usize, self.z as usize)
    }

    /// Restriction to the listed qubits, renumbered in list order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (j, &q) in qubits.iter().enumerate() {
            out.set(j, self.get(q));
        }
        out
    }

    /// Embeds into a wider register, placing character `j` on `qubits[j]`.
    pub fn embed(&self, num_qubits: usize, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(num_qubits);
        for (j, &q) in qubits.iter().enumerate() {
            out.set(q, self.get(j));
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, EngineError> {
        if s.len() > 64 {
            return Err(EngineError::InvalidPauli(s.to_string()));
        }
        let mut p = PauliString::identity(s.len());
        for (q, ch) in s.chars().enumerate() {
            match ch.to_ascii_uppercase() {
                'I' | 'X' | 'Y' | 'Z' => p.set(q, ch),
                _ => return Err(EngineError::InvalidPauli(s.to_string())),
            }
        }
        Ok(p)
    }
}

/// 2x2 matrix of the single-qubit Pauli with label 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli_matrix(label: u8) -> Matrix {
    match label {
        0 => Matrix::identity(2),
        1 => Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        2 => Matrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
        _ => Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let p: PauliString = "XIZY".parse().unwrap();
        assert_eq!(p.to_string(), "XIZY");
        assert_eq!(p.get(0), 'X');
        assert_eq!(p.get(3), 'Y');
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation() {
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }
}
