use super::{fit_exponential_decay_with, DecayFit, MetrologyError, Runner};
use crate::circuit::{Circuit, Gate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sequence parameters of a cycle-benchmarking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbConfig {
    pub lengths: Vec<usize>,
    pub randomizations: usize,
    /// Amplitude below which a decay fit is flagged unreliable.
    pub threshold: f64,
    /// Seed of the random twirl sequences.
    pub seed: u64,
}

impl Default for CbConfig {
    fn default() -> Self {
        Self { lengths: vec![4, 16, 64], randomizations: 20, threshold: super::UNRELIABLE_AMPLITUDE, seed: 7 }
    }
}

/// Decay of one Pauli expectation on one spectator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliDecay {
    pub spectator: usize,
    pub pauli: char,
    /// `(m, mean ⟨P⟩)` averaged over randomizations.
    pub points: Vec<(usize, f64)>,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbResult {
    pub measured: usize,
    pub spectators: Vec<usize>,
    pub dd_active: bool,
    pub config: CbConfig,
    pub decays: Vec<PauliDecay>,
}

impl CbResult {
    pub fn decay(&self, spectator: usize, pauli: char) -> Option<&PauliDecay> {
        self.decays.iter().find(|d| d.spectator == spectator && d.pauli == pauli)
    }
}

const PAULIS: [Gate; 4] = [Gate::I, Gate::X, Gate::Y, Gate::Z];

fn prepare(c: &mut Circuit, q: usize, pauli: char) {
    match pauli {
        'X' => {
            c.h(q);
        }
        'Y' => {
            c.h(q).gate(Gate::S, &[q]);
        }
        _ => {}
    }
}

fn unprepare(c: &mut Circuit, q: usize, pauli: char) {
    match pauli {
        'X' => {
            c.h(q);
        }
        'Y' => {
            c.gate(Gate::Sdg, &[q]).h(q);
        }
        _ => {}
    }
}

/// Whether the Pauli with index `k` in `I, X, Y, Z` anticommutes with `pauli`.
fn anticommutes(k: usize, pauli: char) -> bool {
    let p = match pauli {
        'X' => 1,
        'Y' => 2,
        _ => 3,
    };
    k != 0 && k != p
}

/// One twirled sequence: spectators start in the +1 eigenstate of `pauli`,
/// then `m` cycles of a random Pauli layer on the spectators followed by a
/// measurement of `measured`. Returns the circuit, the spectator readout
/// bits, and the sign each spectator's result must be multiplied by to undo
/// the net twirl.
fn sequence(
    spectators: &[usize],
    measured: usize,
    pauli: char,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> (Circuit, Vec<usize>, Vec<f64>) {
    let width = spectators.iter().copied().chain([measured]).max().unwrap_or(0) + 1;
    let mut c = Circuit::new(width, 1);
    let mut sign = vec![1.0; spectators.len()];
    for &s in spectators {
        prepare(&mut c, s, pauli);
    }
    for _ in 0..m {
        for (i, &s) in spectators.iter().enumerate() {
            let k = rng.gen_range(0..4);
            if k != 0 {
                c.gate(PAULIS[k], &[s]);
            }
            if anticommutes(k, pauli) {
                sign[i] = -sign[i];
            }
        }
        c.measure(measured, 0);
    }
    let bits = spectators
        .iter()
        .map(|&s| {
            unprepare(&mut c, s, pauli);
            let b = c.add_cbit();
            c.measure(s, b);
            b
        })
        .collect();
    (c, bits, sign)
}

/// Cycle benchmarking of spectator coherence under repeated mid-circuit
/// measurement of a neighbour. Only the spectators are twirled. For each
/// Pauli and length the signed expectation is averaged over randomizations
/// and fitted to `A·p^m` per spectator.
pub fn cb_mcm_experiment(
    spectators: &[usize],
    measured: usize,
    config: &CbConfig,
    dd_active: bool,
    runner: &Runner,
) -> Result<CbResult, MetrologyError> {
    if spectators.is_empty() || spectators.contains(&measured) {
        return Err(MetrologyError::InvalidInput("spectators must be non-empty and exclude the measured qubit".into()));
    }
    let mut distinct = config.lengths.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(MetrologyError::InvalidInput("need at least 3 distinct sequence lengths".into()));
    }
    if config.randomizations < 10 {
        return Err(MetrologyError::InvalidInput("need at least 10 randomizations".into()));
    }
    let runner = Runner { backend: runner.backend, noise: runner.noise.clone().map(|n| n.with_dd(dd_active)) };
    let mut decays = Vec::new();
    for (pi, pauli) in ['X', 'Y', 'Z'].into_iter().enumerate() {
        let mut means = vec![vec![0.0; config.lengths.len()]; spectators.len()];
        for (li, &m) in config.lengths.iter().enumerate() {
            for r in 0..config.randomizations {
                let job = ((pi * config.lengths.len() + li) * config.randomizations + r) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(job);
                let (c, bits, sign) = sequence(spectators, measured, pauli, m, &mut rng);
                let d = runner.distribution(&c, &bits, job)?;
                for (i, s) in sign.iter().enumerate() {
                    means[i][li] += s * d.parity_expectation(&[i]) / config.randomizations as f64;
                }
            }
        }
        for (i, &s) in spectators.iter().enumerate() {
            let points: Vec<(usize, f64)> = config.lengths.iter().copied().zip(means[i].iter().copied()).collect();
            let fpts: Vec<(f64, f64)> = points.iter().map(|&(m, y)| (m as f64, y)).collect();
            let fit = fit_exponential_decay_with(&fpts, config.threshold)?;
            decays.push(PauliDecay { spectator: s, pauli, points, fit });
        }
    }
    Ok(CbResult { measured, spectators: spectators.to_vec(), dd_active, config: config.clone(), decays })
}
