//! Circuit execution on interchangeable state representations.
//!
//! - [`run_trajectories`]: shot sampling on state vectors, with noise
//!   channels applied by Kraus-operator sampling.
//! - [`run_density`]: exact density-matrix evolution, branching on the
//!   classical register so feed-forward stays exact under noise.
//! - [`stabilizer_run`]: single-shot Clifford execution on a tableau.
//! - [`enumerate_branches`]: exhaustive expansion of every measurement
//!   outcome of a noiseless circuit; the ground-truth oracle.

mod branches;
mod density;
mod distribution;
mod exact;
pub(crate) mod gates;
pub mod pauli;
mod program;
mod pure;
mod stabilizer;
mod trajectory;

use crate::circuit::Violation;
use serde::Serialize;
use thiserror::Error;

pub use branches::{enumerate_branches, OutcomeBranch, MAX_BRANCH_MEASUREMENTS};
pub use density::{DensityMatrix, MAX_DENSITY_QUBITS};
pub use distribution::{bitstring, parse_bitstring, Distribution};
pub use exact::{run_density, run_density_decorated, DensityBranch, DensityRun};
pub use gates::gate_matrix;
pub use pauli::PauliString;
pub use pure::{PureState, MAX_PURE_QUBITS};
pub use stabilizer::{stabilizer_run, StabilizerTableau, MAX_STABILIZER_QUBITS};
pub use trajectory::{run_trajectories, run_trajectories_decorated, shot_rng};

/// Branches whose probability falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("{gate} applied to {found} qubit(s)")]
    Arity { gate: &'static str, found: usize },
    #[error("unsupported gate on stabilizer engine: {gate}")]
    UnsupportedGate { gate: String },
    #[error("the {engine} engine does not support noise operations")]
    NoiseUnsupported { engine: &'static str },
    #[error("{count} measurements exceed the branch-enumeration bound of {limit}")]
    BranchBound { count: usize, limit: usize },
    #[error("{n} qubits exceed the engine limit of {limit}")]
    TooManyQubits { n: usize, limit: usize },
    #[error("{0} classical bits exceed the 64-bit register")]
    TooManyCbits(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state or distribution not normalized (total {0})")]
    NotNormalized(f64),
    #[error("invalid Pauli string `{0}`")]
    InvalidPauli(String),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("circuit does not validate: {0}")]
    InvalidCircuit(Violation),
    #[error("noise: {0}")]
    Noise(String),
    #[error("malformed data: {0}")]
    Format(String),
}

/// Contents of a classical register after a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Clbits {
    pub bits: u64,
    pub width: usize,
}

impl Clbits {
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn to_vec(&self) -> Vec<bool> {
        (0..self.width).map(|i| self.get(i)).collect()
    }
}

impl std::fmt::Display for Clbits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&bitstring(self.bits, self.width))
    }
}

/// A pure or mixed quantum state.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn num_qubits(&self) -> usize {
        match self {
            State::Pure(s) => s.num_qubits(),
            State::Mixed(r) => r.num_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(s) => s.to_density(),
            State::Mixed(r) => r.clone(),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix, EngineError> {
        match self {
            State::Pure(s) => s.reduced(keep),
            State::Mixed(r) => r.partial_trace(keep),
        }
    }
}

/// `|<b|a>|^2` for a pure `a`, `<b|rho_a|b>` for a mixed one.
pub fn state_fidelity(a: &State, b: &PureState) -> Result<f64, EngineError> {
    match a {
        State::Pure(s) => s.fidelity(b),
        State::Mixed(r) => r.fidelity_pure(b),
    }
}

/// `Tr(P rho)` or `<psi|P|psi>`.
pub fn expectation(state: &State, pauli: &PauliString) -> Result<f64, EngineError> {
    match state {
        State::Pure(s) => s.expectation(pauli),
        State::Mixed(r) => r.expectation(pauli),
    }
}
