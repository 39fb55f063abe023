use super::{NoiseError, NoiseModel};
use crate::circuit::{schedule, Activity, Circuit, Instruction, Interval, NoiseOp};

/// Per-qubit cursor over the schedule timeline that hands out accumulated
/// idle time.
struct IdleCursor<'a> {
    intervals: &'a [Interval],
    pos: usize,
}

fn is_idle(iv: &Interval) -> bool {
    matches!(iv.activity, Activity::Idle | Activity::FeedbackWait)
}

impl IdleCursor<'_> {
    /// Idle time up to and including the intervals owned by instruction `i`.
    fn take_through(&mut self, i: usize) -> f64 {
        let Some(last) = self.intervals[self.pos..].iter().rposition(|iv| iv.instruction == Some(i)) else {
            return 0.0;
        };
        let end = self.pos + last + 1;
        let idle = self.intervals[self.pos..end].iter().filter(|iv| is_idle(iv)).map(Interval::duration_ns).sum();
        self.pos = end;
        idle
    }

    fn take_rest(&mut self) -> f64 {
        let idle = self.intervals[self.pos..].iter().filter(|iv| is_idle(iv)).map(Interval::duration_ns).sum();
        self.pos = self.intervals.len();
        idle
    }
}

/// Inserts explicit noise operations into `circuit` according to `noise`.
///
/// - Idle decoherence on every active qubit for each idle or feedback-wait
///   window of the schedule (including explicit delays), merged per gap and
///   placed just before the qubit's next instruction or at the end.
/// - A phase flip on each listed spectator after every measurement or reset
///   of its partner.
/// - A readout error on the written bit after every measurement.
/// - Depolarizing noise after every unconditional gate with a non-zero
///   calibrated error.
///
/// Operations that would act trivially are omitted, so a noiseless model
/// returns the circuit unchanged.
pub fn decorate(circuit: &Circuit, noise: &NoiseModel) -> Result<Circuit, NoiseError> {
    let active = circuit.active_qubits();
    if let Some(&max) = active.last() {
        if max >= noise.num_qubits() {
            return Err(NoiseError::Coverage { covered: noise.num_qubits(), needed: max + 1 });
        }
    }
    let sched = schedule(circuit, &noise.durations)?;
    let mut is_active = vec![false; circuit.num_qubits];
    for &q in &active {
        is_active[q] = true;
    }
    let idle_params: Vec<(f64, f64)> = (0..circuit.num_qubits)
        .map(|q| {
            let c = noise.coherence_of(q);
            (c.t1_us, c.tphi_us(noise.dd_active))
        })
        .collect();
    for &q in &active {
        let t1 = idle_params[q].0;
        if t1.is_nan() || t1 <= 0.0 {
            return Err(NoiseError::NonPositiveT1(t1));
        }
    }
    let decays = |q: usize| idle_params[q].0.is_finite() || idle_params[q].1.is_finite();

    let mut cursors: Vec<IdleCursor> =
        sched.timeline.per_qubit.iter().map(|iv| IdleCursor { intervals: iv, pos: 0 }).collect();
    let mut out = Circuit { instructions: Vec::new(), ..circuit.clone() };
    let idle_op = |q: usize, t: f64| {
        Instruction::Noise(NoiseOp::Idle { qubit: q, duration_ns: t, t1_us: idle_params[q].0, tphi_us: idle_params[q].1 })
    };

    for (i, inst) in circuit.instructions.iter().enumerate() {
        let touched = match inst {
            Instruction::Barrier { .. } => Vec::new(),
            other => other.qubits(),
        };
        let mut idle_after = Vec::new();
        for &q in &touched {
            let idle = cursors[q].take_through(i);
            if idle > 0.0 && decays(q) {
                if matches!(inst, Instruction::Delay { .. }) {
                    idle_after.push(idle_op(q, idle));
                } else {
                    out.push(idle_op(q, idle));
                }
            }
        }
        out.push(inst.clone());
        out.instructions.extend(idle_after);

        match inst {
            Instruction::Gate(op) => {
                let p = match op.qubits.as_slice() {
                    [q] => noise.gate_errors.single(*q),
                    [a, b] => noise.gate_errors.pair(*a, *b),
                    _ => 0.0,
                };
                if p > 0.0 {
                    out.push(Instruction::Noise(NoiseOp::Depolarize { qubits: op.qubits.clone(), p }));
                }
            }
            Instruction::Measure { qubit, cbit, .. } => {
                push_spectators(&mut out, noise, *qubit, &is_active);
                let r = noise.readout.get(*qubit);
                if !r.is_perfect() {
                    out.push(Instruction::Noise(NoiseOp::ReadoutError { cbit: *cbit, p00: r.p00, p11: r.p11 }));
                }
            }
            Instruction::Reset { qubit } => push_spectators(&mut out, noise, *qubit, &is_active),
            _ => {}
        }
    }

    for &q in &active {
        let idle = cursors[q].take_rest();
        if idle > 0.0 && decays(q) {
            out.push(idle_op(q, idle));
        }
    }
    Ok(out)
}

fn push_spectators(out: &mut Circuit, noise: &NoiseModel, measured: usize, is_active: &[bool]) {
    for pair in noise.crosstalk.spectators_of(measured) {
        let p = pair.effective_lambda(noise.dd_active);
        if p > 0.0 && pair.spectator < is_active.len() && is_active[pair.spectator] {
            out.push(Instruction::Noise(NoiseOp::PhaseFlip { qubit: pair.spectator, p }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CondExpr, Gate, GateOp};
    use crate::noise::QubitCoherence;

    #[test]
    fn noiseless_model_is_identity() {
        let mut c = Circuit::new(3, 2);
        c.h(0).cnot(0, 1).measure(1, 0).cond(CondExpr::bit(0), vec![GateOp::one(Gate::X, 2)]).reset(1);
        assert_eq!(decorate(&c, &NoiseModel::noiseless(3)).unwrap(), c);
    }

    #[test]
    fn spectator_and_readout_inserted() {
        let mut noise = NoiseModel::noiseless(2);
        noise.crosstalk.set_lambda(1, 0, 0.5, 1.0);
        noise.readout.qubits[1].p00 = 0.9;
        let mut c = Circuit::new(2, 1);
        c.h(0).measure(1, 0);
        let d = decorate(&c, &noise).unwrap();
        assert_eq!(
            &d.instructions[2..],
            &[
                Instruction::Noise(NoiseOp::PhaseFlip { qubit: 0, p: 0.5 }),
                Instruction::Noise(NoiseOp::ReadoutError { cbit: 0, p00: 0.9, p11: 1.0 }),
            ]
        );
    }

    #[test]
    fn idle_windows_merge_and_flush() {
        let mut noise = NoiseModel::noiseless(2);
        noise.coherence.qubits[0] = QubitCoherence { qubit: 0, t1_us: 50.0, t2_star_us: 40.0, t2_echo_us: 60.0 };
        let mut c = Circuit::new(2, 1);
        c.h(0).measure(1, 0).cond(CondExpr::bit(0), vec![GateOp::one(Gate::X, 0)]);
        let d = decorate(&c, &noise).unwrap();
        let idles: Vec<f64> = d
            .instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Noise(NoiseOp::Idle { duration_ns, .. }) => Some(*duration_ns),
                _ => None,
            })
            .collect();
        // Q0: H [0,30), idle to 700, feedback wait to 850, X [850,880).
        assert_eq!(idles, vec![820.0]);
    }

    #[test]
    fn coverage_checked() {
        let mut c = Circuit::new(3, 0);
        c.h(2);
        assert!(matches!(decorate(&c, &NoiseModel::noiseless(2)), Err(NoiseError::Coverage { .. })));
    }
}
