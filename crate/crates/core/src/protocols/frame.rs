use super::ProtocolError;
use crate::circuit::Gate;
use crate::engine::{EngineError, PauliString, PureState};
use serde::{Deserialize, Serialize};

/// Accumulated X and Z corrections. Composition is XOR of the masks; the
/// phase of a combined X and Z on one qubit is not tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliFrame {
    pub num_qubits: usize,
    pub x_mask: u64,
    pub z_mask: u64,
}

impl PauliFrame {
    pub fn identity(num_qubits: usize) -> Self {
        Self { num_qubits, x_mask: 0, z_mask: 0 }
    }

    pub fn x(num_qubits: usize, qubit: usize) -> Self {
        Self { num_qubits, x_mask: 1 << qubit, z_mask: 0 }
    }

    pub fn z(num_qubits: usize, qubit: usize) -> Self {
        Self { num_qubits, x_mask: 0, z_mask: 1 << qubit }
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn compose(&self, other: &PauliFrame) -> Result<PauliFrame, ProtocolError> {
        if self.num_qubits != other.num_qubits {
            return Err(ProtocolError::SizeMismatch { expected: self.num_qubits, found: other.num_qubits });
        }
        Ok(PauliFrame {
            num_qubits: self.num_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
        })
    }

    pub fn to_pauli(&self) -> PauliString {
        PauliString { num_qubits: self.num_qubits, x: self.x_mask, z: self.z_mask }
    }

    /// Applies Z then X on every flagged qubit.
    pub fn apply(&self, state: &mut PureState) -> Result<(), EngineError> {
        for q in 0..self.num_qubits {
            if (self.z_mask >> q) & 1 == 1 {
                state.apply_gate(Gate::Z, &[q])?;
            }
            if (self.x_mask >> q) & 1 == 1 {
                state.apply_gate(Gate::X, &[q])?;
            }
        }
        Ok(())
    }
}

/// XOR of all frames. Every frame must have the same width.
pub fn compose_frames(frames: &[PauliFrame]) -> Result<PauliFrame, ProtocolError> {
    let first = frames.first().ok_or(ProtocolError::SizeMismatch { expected: 1, found: 0 })?;
    frames[1..].iter().try_fold(*first, |acc, f| acc.compose(f))
}
