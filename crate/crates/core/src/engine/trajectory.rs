use super::program::{write_bit, Program, Step};
use super::{Distribution, EngineError, PureState};
use crate::circuit::{Basis, Circuit, Gate};
use crate::noise::{decorate, NoiseModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Random stream for one shot. Streams depend only on `(seed, shot)`, so
/// results do not depend on how shots are scheduled across threads.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn run_shot<R: Rng>(program: &Program, rng: &mut R) -> Result<u64, EngineError> {
    let mut psi = PureState::new(program.num_qubits)?;
    let mut reg = 0u64;
    for step in &program.steps {
        match step {
            Step::Gate(g, qs) => psi.apply_gate(*g, qs)?,
            Step::Measure { qubit, cbit, basis } => {
                if *basis == Basis::X {
                    psi.apply_gate(Gate::H, &[*qubit])?;
                }
                let m = psi.measure(*qubit, rng)?;
                if *basis == Basis::X {
                    psi.apply_gate(Gate::H, &[*qubit])?;
                }
                reg = write_bit(reg, *cbit, m);
            }
            Step::Reset(q) => {
                if psi.measure(*q, rng)? {
                    psi.apply_gate(Gate::X, &[*q])?;
                }
            }
            Step::Cond(cond, ops) => {
                if cond.eval_packed(reg) {
                    for op in ops {
                        psi.apply_gate(op.gate, &op.qubits)?;
                    }
                }
            }
            Step::Channel(ch, qs) => psi.apply_channel_sampled(ch, qs, rng)?,
            Step::Readout { cbit, p00, p11 } => {
                let bit = (reg >> cbit) & 1 == 1;
                let keep = if bit { *p11 } else { *p00 };
                if rng.gen::<f64>() >= keep {
                    reg = write_bit(reg, *cbit, !bit);
                }
            }
        }
    }
    Ok(reg)
}

/// Samples `shots` executions of a circuit that may already contain noise
/// operations. Counts are keyed by the final classical register.
pub fn run_trajectories_decorated(circuit: &Circuit, shots: u64, seed: u64) -> Result<Distribution, EngineError> {
    if shots == 0 {
        return Err(EngineError::NoShots);
    }
    let program = Program::compile(circuit, true)?;
    let counts = (0..shots)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, shot| {
            let reg = run_shot(&program, &mut shot_rng(seed, shot))?;
            *acc.entry(reg).or_insert(0) += 1;
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

/// Decorates with `noise` when given, then samples.
pub fn run_trajectories(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    shots: u64,
    seed: u64,
) -> Result<Distribution, EngineError> {
    match noise {
        Some(model) => {
            let noisy = decorate(circuit, model).map_err(|e| EngineError::Noise(e.to_string()))?;
            run_trajectories_decorated(&noisy, shots, seed)
        }
        None => run_trajectories_decorated(circuit, shots, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_counts() {
        let mut c = Circuit::new(2, 2);
        c.h(0).cnot(0, 1).measure(0, 0).measure(1, 1);
        let d = run_trajectories(&c, None, 100_000, 5).unwrap();
        assert_eq!(d.count(0b01), Some(0));
        assert_eq!(d.count(0b10), Some(0));
        let sigma = (0.25f64 / 100_000.0).sqrt();
        assert!((d.probability(0) - 0.5).abs() < 5.0 * sigma);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut c = Circuit::new(3, 3);
        c.h(0).gate(Gate::Ry(0.8), &[1]).cnot(1, 2).measure(0, 0).measure(1, 1).measure(2, 2);
        let a = run_trajectories(&c, None, 5000, 42).unwrap();
        let b = run_trajectories(&c, None, 5000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, run_trajectories(&c, None, 5000, 43).unwrap());
    }
}
