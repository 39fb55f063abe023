use super::{
    CoherenceParams, CrosstalkPair, Durations, GateErrorModel, McmCrosstalkModel, NoiseError, NoiseModel, QubitCoherence,
    ReadoutFidelity, ReadoutModel, Regime,
};
use crate::circuit::Topology;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const PACKAGED_DEVICE_NAME: &str = "device_8ring.json";
pub const PACKAGED_DEVICE_JSON: &str = include_str!("../../data/device_8ring.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySection {
    pub num_qubits: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutSection {
    #[serde(default)]
    pub esp_enabled: bool,
    pub qubits: Vec<ReadoutFidelity>,
}

/// On-disk calibration file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub topology: TopologySection,
    pub coherence: Vec<QubitCoherence>,
    pub readout: ReadoutSection,
    pub mcm_crosstalk: McmCrosstalkModel,
    pub durations: Durations,
    #[serde(default)]
    pub gate_error: GateErrorModel,
}

fn bad(msg: impl Into<String>) -> NoiseError {
    NoiseError::Device(msg.into())
}

fn per_qubit<T: Clone>(rows: &[T], n: usize, section: &str, qubit_of: impl Fn(&T) -> usize) -> Result<Vec<T>, NoiseError> {
    let mut slots: Vec<Option<T>> = vec![None; n];
    for r in rows {
        let q = qubit_of(r);
        if q >= n {
            return Err(bad(format!("{section}: qubit {q} outside topology of {n} qubits")));
        }
        if slots[q].is_some() {
            return Err(bad(format!("{section}: duplicate entry for qubit {q}")));
        }
        slots[q] = Some(r.clone());
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(q, s)| s.ok_or_else(|| bad(format!("{section}: missing entry for qubit {q}"))))
        .collect()
}

fn check_pair(p: &CrosstalkPair, threshold: f64, n: usize) -> Result<(), NoiseError> {
    let tag = format!("mcm_crosstalk pair {}->{}", p.measured, p.spectator);
    if p.measured >= n || p.spectator >= n || p.measured == p.spectator {
        return Err(bad(format!("{tag}: invalid qubits")));
    }
    if !(0.0..=0.5).contains(&p.lambda) {
        return Err(bad(format!("{tag}: lambda {} outside [0, 0.5]", p.lambda)));
    }
    if !(0.0..=1.0).contains(&p.dd_suppression) {
        return Err(bad(format!("{tag}: dd_suppression {} outside [0, 1]", p.dd_suppression)));
    }
    let expected = if p.lambda > threshold { Regime::Strong } else { Regime::Weak };
    if p.regime != expected {
        return Err(bad(format!("{tag}: regime {:?} inconsistent with lambda {} and threshold {threshold}", p.regime, p.lambda)));
    }
    Ok(())
}

impl DeviceFile {
    /// Checks completeness and value ranges, then builds the topology and
    /// noise model. Coherence warnings do not fail.
    pub fn into_model(self) -> Result<(Topology, NoiseModel), NoiseError> {
        if self.schema_version != 1 {
            return Err(bad(format!("unsupported schema_version {}", self.schema_version)));
        }
        let n = self.topology.num_qubits;
        if n == 0 {
            return Err(bad("topology: num_qubits must be positive"));
        }
        let mut topology = Topology::new(n, &[]);
        for [a, b] in &self.topology.edges {
            if *a >= n || *b >= n || a == b {
                return Err(bad(format!("topology: invalid edge {a}-{b}")));
            }
            topology.add_edge(*a, *b);
        }

        let coherence = per_qubit(&self.coherence, n, "coherence", |c| c.qubit)?;
        for c in &coherence {
            for (name, v) in [("t1_us", c.t1_us), ("t2_star_us", c.t2_star_us), ("t2_echo_us", c.t2_echo_us)] {
                if v.is_nan() || v <= 0.0 {
                    return Err(bad(format!("coherence: qubit {} {name} must be positive, got {v}", c.qubit)));
                }
            }
        }
        let readout = per_qubit(&self.readout.qubits, n, "readout", |r| r.qubit)?;
        for r in &readout {
            for (name, v) in [("p00", r.p00), ("p11", r.p11)] {
                if !(0.5..=1.0).contains(&v) {
                    return Err(bad(format!("readout: qubit {} {name} = {v} outside [0.5, 1]", r.qubit)));
                }
            }
        }

        let threshold = self.mcm_crosstalk.strong_threshold;
        if !(0.0..=0.5).contains(&threshold) {
            return Err(bad(format!("mcm_crosstalk: strong_threshold {threshold} outside [0, 0.5]")));
        }
        for (i, p) in self.mcm_crosstalk.pairs.iter().enumerate() {
            check_pair(p, threshold, n)?;
            if self.mcm_crosstalk.pairs[..i].iter().any(|o| o.measured == p.measured && o.spectator == p.spectator) {
                return Err(bad(format!("mcm_crosstalk: duplicate pair {}->{}", p.measured, p.spectator)));
            }
        }

        let d = &self.durations;
        for (name, v) in [
            ("single_qubit_gate_ns", d.single_qubit_gate_ns),
            ("two_qubit_gate_ns", d.two_qubit_gate_ns),
            ("measurement_ns", d.measurement_ns),
            ("reset_ns", d.reset_ns),
            ("feedback_latency_ns", d.feedback_latency_ns),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(bad(format!("durations: {name} must be non-negative, got {v}")));
            }
        }

        for e in &self.gate_error.single_qubit {
            if e.qubit >= n || !(0.0..=1.0).contains(&e.process_infidelity) {
                return Err(bad(format!("gate_error: invalid single-qubit entry for qubit {}", e.qubit)));
            }
        }
        for e in &self.gate_error.two_qubit {
            let [a, b] = e.qubits;
            if a >= n || b >= n || a == b || !(0.0..=1.0).contains(&e.process_infidelity) {
                return Err(bad(format!("gate_error: invalid two-qubit entry for {a}-{b}")));
            }
        }

        let model = NoiseModel {
            coherence: CoherenceParams { qubits: coherence },
            readout: ReadoutModel { qubits: readout, esp_enabled: self.readout.esp_enabled },
            crosstalk: self.mcm_crosstalk,
            durations: self.durations,
            gate_errors: self.gate_error,
            dd_active: false,
        };
        Ok((topology, model))
    }
}

pub fn load_device_str(json: &str) -> Result<(Topology, NoiseModel), NoiseError> {
    let file: DeviceFile = serde_json::from_str(json)?;
    file.into_model()
}

/// Loads a calibration file. A path naming the packaged file that does not
/// exist on disk resolves to the embedded copy.
pub fn load_device(path: impl AsRef<Path>) -> Result<(Topology, NoiseModel), NoiseError> {
    let path = path.as_ref();
    if !path.exists() && path.as_os_str() == PACKAGED_DEVICE_NAME {
        return packaged_device();
    }
    load_device_str(&std::fs::read_to_string(path)?)
}

/// The 8-qubit ring calibration shipped with the crate.
pub fn packaged_device() -> Result<(Topology, NoiseModel), NoiseError> {
    load_device_str(PACKAGED_DEVICE_JSON)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packaged_values() {
        let (topo, m) = packaged_device().unwrap();
        assert_eq!(topo, Topology::ring(8));
        assert_eq!(m.coherence_of(2).t1_us, 142.0);
        assert_eq!(m.readout.get(1).p11, 0.962);
        assert_eq!(m.crosstalk.pair(1, 0).unwrap().regime, Regime::Strong);
        assert_eq!(m.crosstalk.pair(2, 1).unwrap().lambda, 0.05);
        assert_eq!(m.durations.feedback_latency_ns, 150.0);
    }

    #[test]
    fn missing_row_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(PACKAGED_DEVICE_JSON).unwrap();
        v["coherence"].as_array_mut().unwrap().retain(|r| r["qubit"] != 7);
        let err = load_device_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("missing entry for qubit 7"), "{err}");
    }

    #[test]
    fn regime_mismatch_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(PACKAGED_DEVICE_JSON).unwrap();
        v["mcm_crosstalk"]["pairs"][0]["lambda"] = serde_json::json!(0.4);
        v["mcm_crosstalk"]["pairs"][0]["regime"] = serde_json::json!("weak");
        assert!(load_device_str(&v.to_string()).is_err());
    }

    #[test]
    fn coherence_warnings_do_not_fail() {
        let mut v: serde_json::Value = serde_json::from_str(PACKAGED_DEVICE_JSON).unwrap();
        v["coherence"][0]["t2_echo_us"] = serde_json::json!(250.0);
        let (_, m) = load_device_str(&v.to_string()).unwrap();
        assert_eq!(m.coherence.warnings().len(), 1);
        assert!(packaged_device().unwrap().1.coherence.warnings().is_empty());
    }
}
