//! Estimators and benchmarking experiments: GHZ fidelity from parity
//! oscillations, truth tables, total variation distance, single-qubit
//! process tomography, decay fitting and cycle benchmarking with an
//! interleaved mid-circuit measurement.

mod cb;
mod estimators;
mod fit;
mod parity;
mod qpt;
mod truth_table;

use crate::circuit::{Circuit, Gate};
use crate::engine::{
    run_density, run_trajectories, shot_rng, stabilizer_run, Distribution, EngineError, PauliString,
};
use crate::noise::NoiseModel;
use crate::protocols::ProtocolError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub use cb::{cb_mcm_experiment, CbConfig, CbResult, PauliDecay};
pub use estimators::{
    bell_fidelity_from_parity, ef_from_r, ghz_fidelity, process_fidelity_from_ptm, r_from_ef, truth_table_fidelity, tvd,
    BellSign, GhzFidelity,
};
pub use fit::{fit_exponential_decay, fit_exponential_decay_with, DecayFit, UNRELIABLE_AMPLITUDE};
pub use parity::{
    default_phases, fit_parity, ghz_fidelity_experiment, parity_circuit, parity_from_state, parity_oscillation,
    GhzFidelityReport, ParityCurve, ParityFit,
};
pub use qpt::{ptm_from_bloch, qpt_protocol, qpt_single_qubit, Ptm, QPT_PREPARATIONS};
pub use truth_table::{ideal_truth_table, truth_table, TruthTable};

#[derive(Debug, Error)]
pub enum MetrologyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} requires the exact backend")]
    NeedsExact(&'static str),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// How experiment circuits are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum Backend {
    /// Exact density-matrix evolution; distributions carry probabilities.
    Exact,
    /// State-vector trajectories with sampled noise.
    Trajectory { shots: u64, seed: u64 },
    /// Repeated single-shot tableau runs; noiseless Clifford circuits only.
    Stabilizer { shots: u64, seed: u64 },
}

/// Seed of experiment job `job` derived from a base seed.
pub fn job_seed(seed: u64, job: u64) -> u64 {
    seed ^ job.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A backend plus an optional noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct Runner {
    pub backend: Backend,
    pub noise: Option<NoiseModel>,
}

impl Runner {
    pub fn exact(noise: Option<NoiseModel>) -> Self {
        Self { backend: Backend::Exact, noise }
    }

    pub fn trajectory(noise: Option<NoiseModel>, shots: u64, seed: u64) -> Self {
        Self { backend: Backend::Trajectory { shots, seed }, noise }
    }

    pub fn shots(&self) -> Option<u64> {
        match self.backend {
            Backend::Exact => None,
            Backend::Trajectory { shots, .. } | Backend::Stabilizer { shots, .. } => Some(shots),
        }
    }

    /// Outcome distribution of the listed classical bits; new bit `j` is
    /// `bits[j]`. `job` distinguishes the random streams of different
    /// circuits in one experiment.
    pub fn distribution(&self, circuit: &Circuit, bits: &[usize], job: u64) -> Result<Distribution, MetrologyError> {
        let full = match self.backend {
            Backend::Exact => run_density(circuit, self.noise.as_ref(), Some(bits))?.distribution(),
            Backend::Trajectory { shots, seed } => {
                run_trajectories(circuit, self.noise.as_ref(), shots, job_seed(seed, job))?
            }
            Backend::Stabilizer { shots, seed } => {
                if self.noise.is_some() {
                    return Err(EngineError::NoiseUnsupported { engine: "stabilizer" }.into());
                }
                stabilizer_counts(circuit, shots, job_seed(seed, job))?
            }
        };
        Ok(full.marginalize(bits))
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of `qubit` at the end of `circuit`.
    /// Sampling backends measure three rotated copies of the circuit.
    pub fn bloch(&self, circuit: &Circuit, qubit: usize, job: u64) -> Result<[f64; 3], MetrologyError> {
        if self.backend == Backend::Exact {
            let run = run_density(circuit, self.noise.as_ref(), Some(&[]))?;
            if qubit < circuit.num_qubits && !run.qubits.contains(&qubit) {
                return Ok([0.0, 0.0, 1.0]);
            }
            let rho = run.reduced(&[qubit])?;
            let mut out = [0.0; 3];
            for (slot, p) in out.iter_mut().zip(['X', 'Y', 'Z']) {
                *slot = rho.expectation(&PauliString::single(1, 0, p))?;
            }
            return Ok(out);
        }
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut c = circuit.clone();
            match k {
                0 => {
                    c.h(qubit);
                }
                1 => {
                    c.gate(Gate::Sdg, &[qubit]).h(qubit);
                }
                _ => {}
            }
            let bit = c.add_cbit();
            c.measure(qubit, bit);
            *slot = self.distribution(&c, &[bit], job * 3 + k as u64)?.parity_expectation(&[0]);
        }
        Ok(out)
    }
}

fn stabilizer_counts(circuit: &Circuit, shots: u64, seed: u64) -> Result<Distribution, EngineError> {
    if shots == 0 {
        return Err(EngineError::NoShots);
    }
    let counts = (0..shots)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, shot| {
            let (bits, _) = stabilizer_run(circuit, &mut shot_rng(seed, shot))?;
            *acc.entry(bits.bits).or_insert(0) += 1;
            Ok::<_, EngineError>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(Distribution::from_counts(circuit.num_cbits, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_on_bell_pair() {
        let mut c = Circuit::new(2, 2);
        c.h(0).cnot(0, 1).measure(0, 0).measure(1, 1);
        let exact = Runner::exact(None).distribution(&c, &[0, 1], 0).unwrap();
        assert!((exact.probability(0b11) - 0.5).abs() < 1e-12);
        let stab = Runner { backend: Backend::Stabilizer { shots: 2000, seed: 3 }, noise: None };
        let d = stab.distribution(&c, &[0, 1], 0).unwrap();
        assert_eq!(d.count(0b01).unwrap_or(0) + d.count(0b10).unwrap_or(0), 0);
    }

    #[test]
    fn bloch_of_plus_state() {
        let mut c = Circuit::new(1, 0);
        c.h(0);
        let b = Runner::exact(None).bloch(&c, 0, 0).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && b[1].abs() < 1e-12 && b[2].abs() < 1e-12);
        let s = Runner::trajectory(None, 4000, 1).bloch(&c, 0, 0).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && s[2].abs() < 0.1);
    }
}
