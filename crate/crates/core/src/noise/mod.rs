//! Device calibration data and the quantum channels derived from it.
//!
//! The noise model covers four mechanisms: idle decoherence (T1 plus pure
//! dephasing), readout confusion, dephasing of idle spectators while a
//! neighbour is measured, and optional depolarizing gate errors. Timing comes
//! from [`Durations`], including the classical feedback latency that sits
//! between a measurement and any gate conditioned on it.

mod channels;
mod decorate;
mod device;
mod readout;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channels::{depolarizing_channel, idle_channel, mcm_spectator_channel, tphi_from, KrausChannel};
pub use decorate::decorate;
pub use device::{load_device, load_device_str, packaged_device, DeviceFile, PACKAGED_DEVICE_JSON, PACKAGED_DEVICE_NAME};
pub use readout::{apply_readout_confusion, flip_readout};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("T1 must be positive, got {0} us")]
    NonPositiveT1(f64),
    #[error("device file: {0}")]
    Device(String),
    #[error("device file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error reading device file: {0}")]
    Io(#[from] std::io::Error),
    #[error("noise model covers {covered} qubits but the circuit uses {needed}")]
    Coverage { covered: usize, needed: usize },
    #[error(transparent)]
    Schedule(#[from] crate::circuit::ScheduleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCoherence {
    pub qubit: usize,
    pub t1_us: f64,
    pub t2_star_us: f64,
    pub t2_echo_us: f64,
}

impl QubitCoherence {
    /// Coherence for a qubit that never decays.
    pub fn ideal(qubit: usize) -> Self {
        Self { qubit, t1_us: f64::INFINITY, t2_star_us: f64::INFINITY, t2_echo_us: f64::INFINITY }
    }

    /// Pure-dephasing time for the free-evolution or echoed T2.
    pub fn tphi_us(&self, echoed: bool) -> f64 {
        let t2 = if echoed { self.t2_echo_us } else { self.t2_star_us };
        if t2.is_infinite() {
            return f64::INFINITY;
        }
        tphi_from(self.t1_us, t2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceParams {
    pub qubits: Vec<QubitCoherence>,
}

impl CoherenceParams {
    /// Calibration entries violating `T2 <= 2 T1`. They are kept as given.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for q in &self.qubits {
            for (name, t2) in [("T2*", q.t2_star_us), ("T2E", q.t2_echo_us)] {
                if t2 > 2.0 * q.t1_us {
                    out.push(format!("Q{}: {name} = {t2} us exceeds 2*T1 = {} us", q.qubit, 2.0 * q.t1_us));
                }
            }
            if q.t2_star_us > q.t2_echo_us {
                out.push(format!("Q{}: T2* = {} us exceeds T2E = {} us", q.qubit, q.t2_star_us, q.t2_echo_us));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutFidelity {
    pub qubit: usize,
    /// P(read 0 | prepared 0).
    pub p00: f64,
    /// P(read 1 | prepared 1).
    pub p11: f64,
}

impl ReadoutFidelity {
    pub fn perfect(qubit: usize) -> Self {
        Self { qubit, p00: 1.0, p11: 1.0 }
    }

    pub fn is_perfect(&self) -> bool {
        self.p00 == 1.0 && self.p11 == 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub qubits: Vec<ReadoutFidelity>,
    /// Whether the fidelities were taken with excited-state promotion. The
    /// simulator has no third level; the flag is informational.
    #[serde(default)]
    pub esp_enabled: bool,
}

impl ReadoutModel {
    pub fn get(&self, qubit: usize) -> ReadoutFidelity {
        self.qubits.iter().find(|r| r.qubit == qubit).copied().unwrap_or(ReadoutFidelity::perfect(qubit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Weak,
    Strong,
}

/// Dephasing of `spectator` each time `measured` is read out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkPair {
    pub measured: usize,
    pub spectator: usize,
    /// Phase-flip probability per measurement, in [0, 0.5].
    pub lambda: f64,
    /// Multiplier on `lambda` while dynamical decoupling is active.
    pub dd_suppression: f64,
    pub regime: Regime,
}

impl CrosstalkPair {
    pub fn effective_lambda(&self, dd_active: bool) -> f64 {
        if dd_active {
            self.lambda * self.dd_suppression
        } else {
            self.lambda
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmCrosstalkModel {
    #[serde(default = "default_strong_threshold")]
    pub strong_threshold: f64,
    pub pairs: Vec<CrosstalkPair>,
}

fn default_strong_threshold() -> f64 {
    0.25
}

impl McmCrosstalkModel {
    pub fn empty() -> Self {
        Self { strong_threshold: default_strong_threshold(), pairs: Vec::new() }
    }

    pub fn pair(&self, measured: usize, spectator: usize) -> Option<&CrosstalkPair> {
        self.pairs.iter().find(|p| p.measured == measured && p.spectator == spectator)
    }

    pub fn spectators_of(&self, measured: usize) -> impl Iterator<Item = &CrosstalkPair> {
        self.pairs.iter().filter(move |p| p.measured == measured)
    }

    /// Sets `lambda` for a pair, inserting it when absent, and retags its
    /// regime against the threshold.
    pub fn set_lambda(&mut self, measured: usize, spectator: usize, lambda: f64, dd_suppression: f64) {
        let regime = if lambda > self.strong_threshold { Regime::Strong } else { Regime::Weak };
        match self.pairs.iter_mut().find(|p| p.measured == measured && p.spectator == spectator) {
            Some(p) => {
                p.lambda = lambda;
                p.dd_suppression = dd_suppression;
                p.regime = regime;
            }
            None => self.pairs.push(CrosstalkPair { measured, spectator, lambda, dd_suppression, regime }),
        }
    }
}

/// Operation durations in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub single_qubit_gate_ns: f64,
    pub two_qubit_gate_ns: f64,
    pub measurement_ns: f64,
    pub reset_ns: f64,
    #[serde(default = "default_latency")]
    pub feedback_latency_ns: f64,
}

fn default_latency() -> f64 {
    150.0
}

impl Default for Durations {
    fn default() -> Self {
        Self {
            single_qubit_gate_ns: 30.0,
            two_qubit_gate_ns: 200.0,
            measurement_ns: 700.0,
            reset_ns: 850.0,
            feedback_latency_ns: default_latency(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitGateError {
    pub qubit: usize,
    pub process_infidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitGateError {
    pub qubits: [usize; 2],
    pub process_infidelity: f64,
}

/// Depolarizing gate errors given as process infidelities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GateErrorModel {
    #[serde(default)]
    pub single_qubit: Vec<SingleQubitGateError>,
    #[serde(default)]
    pub two_qubit: Vec<TwoQubitGateError>,
}

impl GateErrorModel {
    pub fn single(&self, q: usize) -> f64 {
        self.single_qubit.iter().find(|e| e.qubit == q).map_or(0.0, |e| e.process_infidelity)
    }

    pub fn pair(&self, a: usize, b: usize) -> f64 {
        self.two_qubit
            .iter()
            .find(|e| (e.qubits[0] == a && e.qubits[1] == b) || (e.qubits[0] == b && e.qubits[1] == a))
            .map_or(0.0, |e| e.process_infidelity)
    }
}

/// Everything needed to turn an ideal circuit into a noisy one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub coherence: CoherenceParams,
    pub readout: ReadoutModel,
    pub crosstalk: McmCrosstalkModel,
    pub durations: Durations,
    #[serde(default)]
    pub gate_errors: GateErrorModel,
    #[serde(default)]
    pub dd_active: bool,
}

impl NoiseModel {
    /// A model that decorates nothing: infinite coherence, perfect readout,
    /// no crosstalk, no gate errors.
    pub fn noiseless(num_qubits: usize) -> Self {
        Self {
            coherence: CoherenceParams { qubits: (0..num_qubits).map(QubitCoherence::ideal).collect() },
            readout: ReadoutModel { qubits: (0..num_qubits).map(ReadoutFidelity::perfect).collect(), esp_enabled: false },
            crosstalk: McmCrosstalkModel::empty(),
            durations: Durations::default(),
            gate_errors: GateErrorModel::default(),
            dd_active: false,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.coherence.qubits.len()
    }

    pub fn coherence_of(&self, qubit: usize) -> QubitCoherence {
        self.coherence.qubits.iter().find(|c| c.qubit == qubit).cloned().unwrap_or(QubitCoherence::ideal(qubit))
    }

    pub fn with_dd(mut self, dd_active: bool) -> Self {
        self.dd_active = dd_active;
        self
    }

    /// Keeps only readout confusion.
    pub fn readout_only(&self) -> Self {
        let mut m = Self::noiseless(self.num_qubits());
        m.readout = self.readout.clone();
        m.durations = self.durations;
        m
    }

    pub fn without_crosstalk(mut self) -> Self {
        self.crosstalk.pairs.clear();
        self
    }

    pub fn without_gate_errors(mut self) -> Self {
        self.gate_errors = GateErrorModel::default();
        self
    }
}
