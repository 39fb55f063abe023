//! Python bindings: circuits, devices, protocol builders, the execution
//! engines, and the standard experiment suite.

use std::collections::BTreeMap;

use ffwd::circuit::{self, CondExpr, Gate, GateOp, Topology};
use ffwd::engine::{self, bitstring, parse_bitstring};
use ffwd::metrology;
use ffwd::noise::{self, NoiseModel};
use ffwd::protocols::{self, BellMode, FanoutLayout, GhzPlan, ProtocolCircuit, TeleCnotLayout};
use ffwd::suite::{self, SuiteOptions, TELEPORT_CHAIN, TELEPORT_INPUT};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_gate(name: &str, theta: Option<f64>) -> PyResult<Gate> {
    let need = |t: Option<f64>| t.ok_or_else(|| value_err(format!("gate {name} needs an angle")));
    Ok(match name.to_ascii_lowercase().as_str() {
        "i" | "id" => Gate::I,
        "x" => Gate::X,
        "y" => Gate::Y,
        "z" => Gate::Z,
        "h" => Gate::H,
        "s" => Gate::S,
        "sdg" => Gate::Sdg,
        "rx" => Gate::Rx(need(theta)?),
        "ry" => Gate::Ry(need(theta)?),
        "rz" => Gate::Rz(need(theta)?),
        "cx" | "cnot" => Gate::Cnot,
        "cz" => Gate::Cz,
        other => return Err(value_err(format!("unknown gate `{other}`"))),
    })
}

/// An adaptive circuit.
#[pyclass(name = "Circuit", module = "ffwd_py", from_py_object)]
#[derive(Clone)]
pub struct PyCircuit {
    inner: circuit::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[new]
    #[pyo3(signature = (num_qubits, num_cbits = 0))]
    fn new(num_qubits: usize, num_cbits: usize) -> Self {
        Self { inner: circuit::Circuit::new(num_qubits, num_cbits) }
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits
    }

    #[getter]
    fn num_cbits(&self) -> usize {
        self.inner.num_cbits
    }

    #[pyo3(signature = (name, qubits, theta = None))]
    fn gate(&mut self, name: &str, qubits: Vec<usize>, theta: Option<f64>) -> PyResult<()> {
        let g = parse_gate(name, theta)?;
        if g.arity() != qubits.len() {
            return Err(value_err(format!("gate {name} acts on {} qubits", g.arity())));
        }
        self.inner.gate(g, &qubits);
        Ok(())
    }

    fn h(&mut self, q: usize) {
        self.inner.h(q);
    }

    fn x(&mut self, q: usize) {
        self.inner.x(q);
    }

    fn cnot(&mut self, control: usize, target: usize) {
        self.inner.cnot(control, target);
    }

    fn measure(&mut self, qubit: usize, cbit: usize) {
        self.inner.measure(qubit, cbit);
    }

    fn measure_x(&mut self, qubit: usize, cbit: usize) {
        self.inner.measure_x(qubit, cbit);
    }

    fn reset(&mut self, qubit: usize) {
        self.inner.reset(qubit);
    }

    /// Applies `name` to `qubits` when the parity of `cbits` is odd.
    #[pyo3(signature = (cbits, name, qubits, theta = None))]
    fn cond(&mut self, cbits: Vec<usize>, name: &str, qubits: Vec<usize>, theta: Option<f64>) -> PyResult<()> {
        let g = parse_gate(name, theta)?;
        self.inner.cond(CondExpr::parity(&cbits), vec![GateOp::new(g, &qubits)]);
        Ok(())
    }

    fn depth(&self) -> usize {
        circuit::depth(&self.inner)
    }

    /// Violations against an optional coupling map, as strings.
    #[pyo3(signature = (device = None))]
    fn validate(&self, device: Option<&PyDevice>) -> Vec<String> {
        circuit::validate(&self.inner, device.map(|d| &d.topology)).iter().map(|v| v.to_string()).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(runtime_err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: circuit::Circuit::from_json(s).map_err(value_err)? })
    }

    fn to_text(&self) -> String {
        circuit::to_text(&self.inner)
    }

    #[staticmethod]
    fn from_text(s: &str) -> PyResult<Self> {
        Ok(Self { inner: circuit::parse_text(s).map_err(value_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.instructions.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(num_qubits={}, num_cbits={}, instructions={})",
            self.inner.num_qubits,
            self.inner.num_cbits,
            self.inner.instructions.len()
        )
    }
}

/// Outcome distribution over classical bits, keyed by bitstrings with bit 0
/// leftmost.
#[pyclass(name = "Distribution", module = "ffwd_py", from_py_object)]
#[derive(Clone)]
pub struct PyDistribution {
    inner: engine::Distribution,
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    fn from_probabilities(probabilities: BTreeMap<String, f64>) -> PyResult<Self> {
        let width = probabilities.keys().next().map_or(0, |k| k.len());
        let mut entries = Vec::new();
        for (k, p) in probabilities {
            if k.len() != width {
                return Err(value_err("bitstrings must share one width"));
            }
            entries.push((parse_bitstring(&k).ok_or_else(|| value_err(format!("bad bitstring `{k}`")))?, p));
        }
        Ok(Self { inner: engine::Distribution::from_probabilities(width, entries) })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn shots(&self) -> Option<u64> {
        self.inner.shots()
    }

    fn probabilities(&self) -> BTreeMap<String, f64> {
        self.inner.probabilities().map(|(k, p)| (bitstring(k, self.inner.width()), p)).collect()
    }

    fn probability(&self, bits: &str) -> PyResult<f64> {
        Ok(self.inner.probability(parse_bitstring(bits).ok_or_else(|| value_err(format!("bad bitstring `{bits}`")))?))
    }

    fn marginalize(&self, bits: Vec<usize>) -> Self {
        Self { inner: self.inner.marginalize(&bits) }
    }

    fn parity_expectation(&self, bits: Vec<usize>) -> f64 {
        self.inner.parity_expectation(&bits)
    }

    fn tvd(&self, other: &PyDistribution) -> PyResult<f64> {
        metrology::tvd(&self.inner, &other.inner).map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: engine::Distribution::from_json(s).map_err(value_err)? })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!("Distribution(width={}, support={})", self.inner.width(), self.inner.support().count())
    }
}

/// Coupling map plus calibrated noise model.
#[pyclass(name = "Device", module = "ffwd_py", from_py_object)]
#[derive(Clone)]
pub struct PyDevice {
    topology: Topology,
    noise: NoiseModel,
}

#[pymethods]
impl PyDevice {
    /// The bundled eight-qubit ring calibration.
    #[staticmethod]
    fn packaged() -> PyResult<Self> {
        let (topology, noise) = noise::packaged_device().map_err(runtime_err)?;
        Ok(Self { topology, noise })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (topology, noise) = noise::load_device(path).map_err(value_err)?;
        Ok(Self { topology, noise })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let (topology, noise) = noise::load_device_str(s).map_err(value_err)?;
        Ok(Self { topology, noise })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.topology.num_qubits
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.topology.edges().collect()
    }

    fn with_dd(&self, active: bool) -> Self {
        Self { topology: self.topology.clone(), noise: self.noise.clone().with_dd(active) }
    }

    fn readout_only(&self) -> Self {
        Self { topology: self.topology.clone(), noise: self.noise.readout_only() }
    }

    fn warnings(&self) -> Vec<String> {
        self.noise.coherence.warnings()
    }
}

/// A protocol circuit: uncorrected body plus feed-forward decoder.
#[pyclass(name = "Protocol", module = "ffwd_py", from_py_object)]
#[derive(Clone)]
pub struct PyProtocol {
    inner: ProtocolCircuit,
}

fn topo(device: Option<&PyDevice>) -> Option<&Topology> {
    device.map(|d| &d.topology)
}

#[pymethods]
impl PyProtocol {
    /// Constant-depth GHZ preparation. With a device the plan follows its
    /// ring, otherwise a line.
    #[staticmethod]
    #[pyo3(signature = (n, device = None))]
    fn ghz(n: usize, device: Option<&PyDevice>) -> PyResult<Self> {
        let plan = match device {
            Some(d) => GhzPlan::ring(n, d.topology.num_qubits).map_err(value_err)?,
            None => GhzPlan::line(n),
        };
        Ok(Self { inner: protocols::build_ghz_adaptive(&plan, topo(device)).map_err(value_err)? })
    }

    /// Unitary CNOT ladder on the same layout as `ghz`.
    #[staticmethod]
    #[pyo3(signature = (n, device = None))]
    fn ghz_ladder(n: usize, device: Option<&PyDevice>) -> PyResult<Self> {
        let plan = match device {
            Some(d) => GhzPlan::ring(n, d.topology.num_qubits).map_err(value_err)?,
            None => GhzPlan::line(n),
        };
        Ok(Self { inner: protocols::build_ghz_ladder(&plan, topo(device)).map_err(value_err)? })
    }

    /// Long-range CNOT through a Bell pair; `mode` is "unitary" or "adaptive".
    #[staticmethod]
    #[pyo3(signature = (mode = "adaptive", device = None))]
    fn tele_cnot(mode: &str, device: Option<&PyDevice>) -> PyResult<Self> {
        let mode = match mode {
            "unitary" => BellMode::Unitary,
            "adaptive" => BellMode::Adaptive,
            other => return Err(value_err(format!("unknown mode `{other}`"))),
        };
        let layout = TeleCnotLayout::default_for(mode);
        Ok(Self { inner: protocols::build_tele_cnot(&layout, mode, topo(device)).map_err(value_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n_targets, device = None))]
    fn fanout(n_targets: usize, device: Option<&PyDevice>) -> PyResult<Self> {
        let layout = if device.is_some() { FanoutLayout::standard(n_targets) } else { FanoutLayout::fresh(n_targets) };
        Ok(Self { inner: protocols::build_fanout(&layout, topo(device)).map_err(value_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (device = None))]
    fn teleport(device: Option<&PyDevice>) -> PyResult<Self> {
        let pc = protocols::build_teleport(TELEPORT_INPUT, &TELEPORT_CHAIN, TELEPORT_CHAIN[3], topo(device));
        Ok(Self { inner: pc.map_err(value_err)? })
    }

    /// Entanglement swap producing the Bell state labelled by two input bits.
    #[staticmethod]
    #[pyo3(signature = (b0, b1, device = None))]
    fn swap(b0: bool, b1: bool, device: Option<&PyDevice>) -> PyResult<Self> {
        let pc = protocols::build_entanglement_swap(&TELEPORT_CHAIN, [b0, b1], topo(device));
        Ok(Self { inner: pc.map_err(value_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn inputs(&self) -> Vec<usize> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn outputs(&self) -> Vec<usize> {
        self.inner.outputs.clone()
    }

    fn circuit(&self) -> PyCircuit {
        PyCircuit { inner: self.inner.circuit() }
    }

    fn without_corrections(&self) -> PyCircuit {
        PyCircuit { inner: self.inner.without_corrections() }
    }

    /// Full circuit with Z measurements of the outputs and the bits they land in.
    fn measured(&self) -> (PyCircuit, Vec<usize>) {
        let (c, bits) = self.inner.measured();
        (PyCircuit { inner: c }, bits)
    }

    fn with_basis_input(&self, index: u64) -> Self {
        Self { inner: self.inner.with_basis_input(index) }
    }

    fn depth(&self) -> usize {
        circuit::depth(&self.inner.circuit())
    }

    /// Smallest branch fidelity over every measurement outcome.
    fn min_branch_fidelity(&self) -> PyResult<f64> {
        Ok(protocols::verify::min_fidelity(&self.inner.verify().map_err(runtime_err)?))
    }

    fn uncorrected_min_fidelity(&self) -> PyResult<f64> {
        self.inner.uncorrected_min_fidelity().map_err(runtime_err)
    }

    fn rule_json(&self) -> String {
        self.inner.rule.to_json()
    }
}

/// Exact distribution via density-matrix evolution. `bits` marginalizes.
#[pyfunction]
#[pyo3(signature = (circuit, device = None, bits = None))]
fn run_exact(circuit: &PyCircuit, device: Option<&PyDevice>, bits: Option<Vec<usize>>) -> PyResult<PyDistribution> {
    let run = engine::run_density(&circuit.inner, device.map(|d| &d.noise), bits.as_deref()).map_err(runtime_err)?;
    let dist = run.distribution();
    Ok(PyDistribution { inner: match bits {
        Some(b) => dist.marginalize(&b),
        None => dist,
    } })
}

/// Sampled distribution from Monte-Carlo trajectories.
#[pyfunction]
#[pyo3(signature = (circuit, shots, seed = 7, device = None))]
fn run_trajectories(circuit: &PyCircuit, shots: u64, seed: u64, device: Option<&PyDevice>) -> PyResult<PyDistribution> {
    let dist = engine::run_trajectories(&circuit.inner, device.map(|d| &d.noise), shots, seed).map_err(runtime_err)?;
    Ok(PyDistribution { inner: dist })
}

/// Every measurement branch of a noiseless circuit as (bitstring, probability).
#[pyfunction]
fn enumerate_branches(circuit: &PyCircuit) -> PyResult<Vec<(String, f64)>> {
    let branches = engine::enumerate_branches(&circuit.inner).map_err(runtime_err)?;
    let width = circuit.inner.num_cbits;
    Ok(branches.iter().map(|b| (bitstring(b.cbits.bits, width), b.probability)).collect())
}

/// GHZ fidelity from populations and coherence; returns (value, genuine).
#[pyfunction]
fn ghz_fidelity(p_all0: f64, p_all1: f64, coherence: f64) -> PyResult<(f64, bool)> {
    let f = metrology::ghz_fidelity(p_all0, p_all1, coherence).map_err(value_err)?;
    Ok((f.value, f.genuine))
}

/// Runs the standard experiment suite and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (device = None, shots = None, seed = 7, dd = false, include_cb = true))]
fn reproduce(device: Option<&PyDevice>, shots: Option<u64>, seed: u64, dd: bool, include_cb: bool) -> PyResult<String> {
    let device = match device {
        Some(d) => d.clone(),
        None => PyDevice::packaged()?,
    };
    let options = SuiteOptions { shots, seed, dd_active: dd, include_cb, ..SuiteOptions::default() };
    let report = suite::reproduce(&device.topology, &device.noise, &options).map_err(runtime_err)?;
    serde_json::to_string(&report).map_err(runtime_err)
}

#[pymodule]
fn ffwd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyDevice>()?;
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(run_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_trajectories, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_branches, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    m.add("SCHEMA_VERSION", suite::SCHEMA_VERSION)?;
    Ok(())
}
