//! Simulation and benchmarking of adaptive quantum circuits: circuits with
//! mid-circuit measurements, classical registers, and feed-forward gates.
//!
//! - [`circuit`]: the circuit IR, validation, depth, scheduling, text form.
//! - [`engine`]: state-vector, density-matrix, and stabilizer execution plus
//!   exhaustive branch enumeration.
//! - [`noise`]: device calibration and the channels derived from it.
//! - [`protocols`]: constant-depth GHZ, teleported CNOT, fan-out,
//!   teleportation, and entanglement swapping builders.
//! - [`metrology`]: fidelity estimators, tomography, and cycle benchmarking.
//! - [`suite`]: the standard experiment set shared by the CLI and bindings.

pub mod circuit;
pub mod engine;
pub mod linalg;
pub mod metrology;
pub mod noise;
pub mod protocols;
pub mod suite;

pub use circuit::{Basis, Circuit, CondExpr, Gate, GateOp, Instruction, NoiseOp, Topology};
pub use engine::{Distribution, DensityMatrix, PauliString, PureState, StabilizerTableau};
pub use noise::NoiseModel;
