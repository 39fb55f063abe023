use super::{validate, Basis, Circuit, Instruction, Violation};
use crate::noise::Durations;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activity {
    Gate,
    Measure,
    Idle,
    FeedbackWait,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub start_ns: f64,
    pub end_ns: f64,
    pub activity: Activity,
    /// Instruction that occupies the interval; `None` for gaps.
    pub instruction: Option<usize>,
}

impl Interval {
    pub fn duration_ns(&self) -> f64 {
        self.end_ns - self.start_ns
    }
}

/// Per-qubit activity record. Intervals on each qubit are contiguous from
/// zero and every qubit ends at `end_ns`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    pub per_qubit: Vec<Vec<Interval>>,
    pub end_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub timeline: Timeline,
    /// `(start_ns, end_ns)` of every instruction, in program order.
    pub slots: Vec<(f64, f64)>,
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid duration for {kind}: {value} ns")]
    InvalidDuration { kind: &'static str, value: f64 },
    #[error("circuit does not validate: {0}")]
    InvalidCircuit(Violation),
}

fn checked(kind: &'static str, value: f64) -> Result<f64, ScheduleError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ScheduleError::InvalidDuration { kind, value })
    }
}

/// Assigns wall-clock windows to every instruction.
///
/// Instructions start as soon as their qubits are free. A conditional block
/// additionally waits until the latest measurement feeding its condition has
/// finished plus the feedback latency; that wait is labelled
/// [`Activity::FeedbackWait`]. Gates inside one conditional sourced from the
/// same measurement run simultaneously when their supports are disjoint.
pub fn schedule(circuit: &Circuit, durations: &Durations) -> Result<Schedule, ScheduleError> {
    if let Some(v) = validate(circuit, None).into_iter().next() {
        return Err(ScheduleError::InvalidCircuit(v));
    }
    let one_q = checked("single-qubit gate", durations.single_qubit_gate_ns)?;
    let two_q = checked("two-qubit gate", durations.two_qubit_gate_ns)?;
    let meas = checked("measurement", durations.measurement_ns)?;
    let reset = checked("reset", durations.reset_ns)?;
    let latency = checked("feedback latency", durations.feedback_latency_ns)?;

    let n = circuit.num_qubits;
    let mut free = vec![0.0f64; n];
    let mut per_qubit: Vec<Vec<Interval>> = vec![Vec::new(); n];
    let mut meas_end = vec![0.0f64; circuit.num_cbits];
    let mut slots = Vec::with_capacity(circuit.instructions.len());

    // Fill [free[q], start) with idle time, switching to feedback-wait from
    // `wait_from` onwards.
    fn gap(iv: &mut Vec<Interval>, from: f64, to: f64, wait_from: Option<f64>) {
        if to <= from {
            return;
        }
        match wait_from {
            Some(w) if w < to => {
                let split = w.max(from);
                if split > from {
                    iv.push(Interval { start_ns: from, end_ns: split, activity: Activity::Idle, instruction: None });
                }
                iv.push(Interval { start_ns: split, end_ns: to, activity: Activity::FeedbackWait, instruction: None });
            }
            _ => iv.push(Interval { start_ns: from, end_ns: to, activity: Activity::Idle, instruction: None }),
        }
    }

    for (i, inst) in circuit.instructions.iter().enumerate() {
        let gate_time = |arity: usize| if arity == 2 { two_q } else { one_q };
        match inst {
            Instruction::Gate(op) => {
                let start = op.qubits.iter().map(|&q| free[q]).fold(0.0, f64::max);
                let end = start + gate_time(op.gate.arity());
                for &q in &op.qubits {
                    gap(&mut per_qubit[q], free[q], start, None);
                    per_qubit[q].push(Interval { start_ns: start, end_ns: end, activity: Activity::Gate, instruction: Some(i) });
                    free[q] = end;
                }
                slots.push((start, end));
            }
            Instruction::Measure { qubit, cbit, basis } => {
                let q = *qubit;
                let start = free[q];
                let end = start + meas + if *basis == Basis::X { one_q } else { 0.0 };
                per_qubit[q].push(Interval { start_ns: start, end_ns: end, activity: Activity::Measure, instruction: Some(i) });
                free[q] = end;
                meas_end[*cbit] = end;
                slots.push((start, end));
            }
            Instruction::Reset { qubit } => {
                let q = *qubit;
                let start = free[q];
                let end = start + reset;
                per_qubit[q].push(Interval { start_ns: start, end_ns: end, activity: Activity::Measure, instruction: Some(i) });
                free[q] = end;
                slots.push((start, end));
            }
            Instruction::Delay { qubit, duration_ns } => {
                let q = *qubit;
                let start = free[q];
                let end = start + checked("delay", *duration_ns)?;
                if end > start {
                    per_qubit[q].push(Interval { start_ns: start, end_ns: end, activity: Activity::Idle, instruction: Some(i) });
                }
                free[q] = end;
                slots.push((start, end));
            }
            Instruction::Conditional { cond, ops } => {
                let bits = cond.bits();
                let source_end = bits.iter().map(|&b| meas_end[b]).fold(None, |acc: Option<f64>, t| {
                    Some(acc.map_or(t, |a| a.max(t)))
                });
                let ready = source_end.map_or(0.0, |t| t + latency);
                let mut first = f64::INFINITY;
                let mut last: f64 = 0.0;
                for op in ops {
                    let start = op.qubits.iter().map(|&q| free[q]).fold(ready, f64::max);
                    let end = start + gate_time(op.gate.arity());
                    for &q in &op.qubits {
                        gap(&mut per_qubit[q], free[q], start, source_end);
                        per_qubit[q].push(Interval { start_ns: start, end_ns: end, activity: Activity::Gate, instruction: Some(i) });
                        free[q] = end;
                    }
                    first = first.min(start);
                    last = last.max(end);
                }
                if ops.is_empty() {
                    first = ready;
                    last = ready;
                }
                slots.push((first, last));
            }
            Instruction::Barrier { qubits } => {
                let qs: Vec<usize> = if qubits.is_empty() { (0..n).collect() } else { qubits.clone() };
                let sync = qs.iter().map(|&q| free[q]).fold(0.0, f64::max);
                for q in qs {
                    gap(&mut per_qubit[q], free[q], sync, None);
                    free[q] = sync;
                }
                slots.push((sync, sync));
            }
            Instruction::Noise(op) => {
                let t = op.qubits().iter().map(|&q| free[q]).fold(0.0, f64::max);
                slots.push((t, t));
            }
        }
    }

    let end_ns = free.iter().copied().fold(0.0, f64::max);
    for q in 0..n {
        gap(&mut per_qubit[q], free[q], end_ns, None);
    }
    Ok(Schedule { timeline: Timeline { per_qubit, end_ns }, slots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CondExpr, Gate, GateOp};

    fn durations() -> Durations {
        Durations {
            single_qubit_gate_ns: 30.0,
            two_qubit_gate_ns: 200.0,
            measurement_ns: 700.0,
            reset_ns: 850.0,
            feedback_latency_ns: 150.0,
        }
    }

    fn assert_contiguous(t: &Timeline) {
        for iv in &t.per_qubit {
            let mut cursor = 0.0;
            for i in iv {
                assert_eq!(i.start_ns, cursor);
                assert!(i.end_ns > i.start_ns);
                cursor = i.end_ns;
            }
            assert_eq!(cursor, t.end_ns);
        }
    }

    #[test]
    fn single_measure_pads_other_qubits() {
        let mut c = Circuit::new(3, 1);
        c.measure(0, 0);
        let s = schedule(&c, &durations()).unwrap();
        assert_eq!(s.timeline.end_ns, 700.0);
        assert_eq!(s.timeline.per_qubit[0][0].activity, Activity::Measure);
        for q in 1..3 {
            assert_eq!(s.timeline.per_qubit[q], vec![Interval { start_ns: 0.0, end_ns: 700.0, activity: Activity::Idle, instruction: None }]);
        }
        assert_contiguous(&s.timeline);
    }

    #[test]
    fn conditional_waits_for_feedback_latency() {
        let mut c = Circuit::new(2, 1);
        c.measure(1, 0).cond(CondExpr::bit(0), vec![GateOp::one(Gate::X, 0)]);
        let s = schedule(&c, &durations()).unwrap();
        assert_eq!(s.slots[1], (850.0, 880.0));
        let q0 = &s.timeline.per_qubit[0];
        assert_eq!(q0[0].activity, Activity::Idle);
        assert_eq!((q0[0].start_ns, q0[0].end_ns), (0.0, 700.0));
        assert_eq!(q0[1].activity, Activity::FeedbackWait);
        assert_eq!((q0[1].start_ns, q0[1].end_ns), (700.0, 850.0));
        assert_contiguous(&s.timeline);
    }

    #[test]
    fn parallel_measures_share_window() {
        let mut c = Circuit::new(2, 2);
        c.measure(0, 0).measure(1, 1);
        let s = schedule(&c, &durations()).unwrap();
        assert_eq!(s.slots, vec![(0.0, 700.0), (0.0, 700.0)]);
    }

    #[test]
    fn negative_duration_rejected() {
        let mut d = durations();
        d.measurement_ns = -1.0;
        assert!(matches!(schedule(&Circuit::new(1, 0), &d), Err(ScheduleError::InvalidDuration { .. })));
    }
}
