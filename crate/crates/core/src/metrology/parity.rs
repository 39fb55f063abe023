use super::{ghz_fidelity, GhzFidelity, MetrologyError, Runner};
use crate::circuit::{Circuit, Gate};
use crate::engine::{PauliString, State};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Fits whose RMS residual exceeds this are flagged unreliable.
pub const PARITY_RESIDUAL_LIMIT: f64 = 0.1;

/// Parity estimates at a grid of analysis phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityCurve {
    pub n: usize,
    pub phases: Vec<f64>,
    pub parity: Vec<f64>,
    /// Shots per phase point; `None` for exact probabilities.
    pub shots: Option<u64>,
}

/// Least-squares fit of `a·cos(nφ) + b·sin(nφ) + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityFit {
    /// `|C| = hypot(a, b)`.
    pub amplitude: f64,
    /// Phase offset `φ0` in `C·cos(nφ + φ0)`.
    pub phase: f64,
    /// Coefficient of `cos(nφ)`: the coherence with its sign, positive for
    /// `(|0…0⟩ + |1…1⟩)/√2` and negative for the minus combination.
    pub signed: f64,
    pub offset: f64,
    pub rms_residual: f64,
    pub reliable: bool,
}

/// Evenly spaced phases over `[0, 2π)`, at least 16 and at least `4n + 4`
/// so frequency `n` is resolved well above Nyquist.
pub fn default_phases(n: usize) -> Vec<f64> {
    let m = (4 * n + 4).max(16);
    (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
}

/// Appends the equatorial analysis rotation at phase `φ` to each data qubit
/// and measures them into fresh bits. The rotation is a π/2 pulse whose
/// axis makes the Z measurement equivalent to measuring `cos φ X + sin φ Y`,
/// so an ideal GHZ state gives parity `cos(nφ)`. Returns the circuit and the
/// new bits.
pub fn parity_circuit(prep: &Circuit, data: &[usize], phase: f64) -> (Circuit, Vec<usize>) {
    let axis = phase - FRAC_PI_2;
    let mut c = prep.clone();
    for &q in data {
        c.gate(Gate::Rz(-axis), &[q]).gate(Gate::Rx(FRAC_PI_2), &[q]).gate(Gate::Rz(axis), &[q]);
    }
    let bits = measure_all(&mut c, data);
    (c, bits)
}

fn measure_all(c: &mut Circuit, qubits: &[usize]) -> Vec<usize> {
    qubits
        .iter()
        .map(|&q| {
            let b = c.add_cbit();
            c.measure(q, b);
            b
        })
        .collect()
}

/// Parity of the data qubits at every phase.
pub fn parity_oscillation(
    prep: &Circuit,
    data: &[usize],
    phases: &[f64],
    runner: &Runner,
) -> Result<ParityCurve, MetrologyError> {
    if phases.len() < 8 {
        return Err(MetrologyError::InvalidInput(format!("need at least 8 phases, got {}", phases.len())));
    }
    if data.is_empty() {
        return Err(MetrologyError::InvalidInput("no data qubits".into()));
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let parity = phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let (c, bits) = parity_circuit(prep, data, phi);
            Ok(runner.distribution(&c, &bits, k as u64)?.parity_expectation(&all))
        })
        .collect::<Result<Vec<_>, MetrologyError>>()?;
    Ok(ParityCurve { n: data.len(), phases: phases.to_vec(), parity, shots: runner.shots() })
}

/// Fits the curve at frequency `curve.n`.
pub fn fit_parity(curve: &ParityCurve) -> Result<ParityFit, MetrologyError> {
    let m = curve.phases.len();
    if m != curve.parity.len() {
        return Err(MetrologyError::DimensionMismatch { expected: m, found: curve.parity.len() });
    }
    if m < 3 {
        return Err(MetrologyError::InvalidInput("fewer than 3 phase points".into()));
    }
    let n = curve.n as f64;
    let design = DMatrix::from_fn(m, 3, |i, j| {
        let x = n * curve.phases[i];
        match j {
            0 => x.cos(),
            1 => x.sin(),
            _ => 1.0,
        }
    });
    let y = DVector::from_column_slice(&curve.parity);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| MetrologyError::InvalidInput(format!("parity fit failed: {e}")))?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let resid = &y - &design * &coef;
    let rms_residual = (resid.norm_squared() / m as f64).sqrt();
    Ok(ParityFit {
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
        signed: a,
        offset: c,
        rms_residual,
        reliable: rms_residual <= PARITY_RESIDUAL_LIMIT,
    })
}

/// Exact parity `⟨⊗(cos φ X + sin φ Y)⟩` of `data` in `state`.
pub fn parity_from_state(state: &State, data: &[usize], phase: f64) -> Result<f64, MetrologyError> {
    let n = state.num_qubits();
    let k = data.len();
    let mut total = 0.0;
    for mask in 0..1u64 << k {
        let mut p = PauliString::identity(n);
        let mut weight = 1.0;
        for (i, &q) in data.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                p.set(q, 'Y');
                weight *= phase.sin();
            } else {
                p.set(q, 'X');
                weight *= phase.cos();
            }
        }
        if weight.abs() > 1e-15 {
            total += weight * crate::engine::expectation(state, &p)?;
        }
    }
    Ok(total)
}

/// Populations, parity curve, fit and fidelity estimate for a GHZ
/// preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzFidelityReport {
    pub n: usize,
    pub p_all0: f64,
    pub p_all1: f64,
    pub curve: ParityCurve,
    pub fit: ParityFit,
    pub fidelity: GhzFidelity,
}

/// Full estimator: measure populations in Z, sweep the parity, fit, and
/// combine.
pub fn ghz_fidelity_experiment(
    prep: &Circuit,
    data: &[usize],
    phases: Option<&[f64]>,
    runner: &Runner,
) -> Result<GhzFidelityReport, MetrologyError> {
    let n = data.len();
    let mut pop = prep.clone();
    let bits = measure_all(&mut pop, data);
    let d = runner.distribution(&pop, &bits, u64::MAX / 2)?;
    let all1 = (1u64 << n) - 1;
    let (p_all0, p_all1) = (d.probability(0), d.probability(all1));
    let default = default_phases(n);
    let curve = parity_oscillation(prep, data, phases.unwrap_or(&default), runner)?;
    let fit = fit_parity(&curve)?;
    let fidelity = ghz_fidelity(p_all0, p_all1, fit.amplitude.min(1.0))?;
    Ok(GhzFidelityReport { n, p_all0, p_all1, curve, fit, fidelity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz_prep(n: usize) -> Circuit {
        let mut c = Circuit::new(n, 0);
        c.h(0);
        for q in 1..n {
            c.cnot(q - 1, q);
        }
        c
    }

    #[test]
    fn ideal_parity_is_cos_n_phi() {
        for n in 1..=4 {
            let prep = ghz_prep(n);
            let data: Vec<usize> = (0..n).collect();
            let curve = parity_oscillation(&prep, &data, &default_phases(n), &Runner::exact(None)).unwrap();
            for (phi, p) in curve.phases.iter().zip(&curve.parity) {
                assert!((p - (n as f64 * phi).cos()).abs() < 1e-9, "n={n} phi={phi} p={p}");
            }
            let fit = fit_parity(&curve).unwrap();
            assert!((fit.amplitude - 1.0).abs() < 1e-9 && (fit.signed - 1.0).abs() < 1e-9);
            assert!(fit.reliable);
        }
    }

    #[test]
    fn state_parity_matches_circuit_parity() {
        let prep = ghz_prep(3);
        let rho = crate::engine::run_density(&prep, None, Some(&[])).unwrap().reduced(&[0, 1, 2]).unwrap();
        let state = State::Mixed(rho);
        for phi in default_phases(3) {
            let (c, bits) = parity_circuit(&prep, &[0, 1, 2], phi);
            let d = Runner::exact(None).distribution(&c, &bits, 0).unwrap();
            let want = d.parity_expectation(&[0, 1, 2]);
            assert!((parity_from_state(&state, &[0, 1, 2], phi).unwrap() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn product_state_has_no_coherence() {
        let prep = Circuit::new(3, 0);
        let r = ghz_fidelity_experiment(&prep, &[0, 1, 2], None, &Runner::exact(None)).unwrap();
        assert!(r.fit.amplitude < 1e-9);
        assert!((r.fidelity.value - 0.5).abs() < 1e-9 && !r.fidelity.genuine);
    }

    #[test]
    fn minus_combination_has_negative_sign() {
        let mut prep = ghz_prep(2);
        prep.gate(Gate::Z, &[0]);
        let curve = parity_oscillation(&prep, &[0, 1], &default_phases(2), &Runner::exact(None)).unwrap();
        let fit = fit_parity(&curve).unwrap();
        assert!((fit.signed + 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_phases_rejected() {
        let phases = [0.0, 1.0, 2.0];
        assert!(parity_oscillation(&ghz_prep(2), &[0, 1], &phases, &Runner::exact(None)).is_err());
    }
}
