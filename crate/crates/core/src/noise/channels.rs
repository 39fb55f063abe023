use super::NoiseError;
use crate::circuit::NoiseOp;
use crate::linalg::{c, Matrix, ZERO};
use crate::engine::pauli::pauli_matrix;
use serde::{Deserialize, Serialize};

/// Completely positive trace-preserving map in Kraus form over
/// `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    pub num_qubits: usize,
    pub ops: Vec<Matrix>,
}

impl KrausChannel {
    pub fn identity(num_qubits: usize) -> Self {
        Self { num_qubits, ops: vec![Matrix::identity(1 << num_qubits)] }
    }

    /// `max |sum K^dag K - I|` entrywise.
    pub fn completeness_error(&self) -> f64 {
        let d = 1 << self.num_qubits;
        let mut sum = Matrix::zeros(d);
        for k in &self.ops {
            sum = sum.add(&(&k.adjoint() * k));
        }
        sum.max_abs_diff(&Matrix::identity(d))
    }

    pub fn is_identity(&self) -> bool {
        self.ops.len() == 1 && self.ops[0].max_abs_diff(&Matrix::identity(1 << self.num_qubits)) < 1e-15
    }

    /// Kraus form of a decoration noise operation; `None` for classical ones.
    pub fn from_op(op: &NoiseOp) -> Option<Self> {
        match op {
            NoiseOp::Idle { duration_ns, t1_us, tphi_us, .. } => {
                Some(idle_channel(*t1_us, *tphi_us, *duration_ns).expect("validated T1"))
            }
            NoiseOp::PhaseFlip { p, .. } => Some(phase_flip(*p)),
            NoiseOp::Depolarize { qubits, p } => Some(depolarizing_channel(qubits.len(), *p)),
            NoiseOp::ReadoutError { .. } => None,
        }
    }
}

fn phase_flip(p: f64) -> KrausChannel {
    if p == 0.0 {
        return KrausChannel::identity(1);
    }
    let a = (1.0 - p).sqrt();
    let b = p.sqrt();
    KrausChannel {
        num_qubits: 1,
        ops: vec![Matrix::from_real(2, &[a, 0.0, 0.0, a]), Matrix::from_real(2, &[b, 0.0, 0.0, -b])],
    }
}

/// Amplitude damping with `p_amp = 1 - exp(-t/T1)` followed by pure
/// dephasing with `p_phi = (1 - exp(-t/Tphi)) / 2`. `t` is in nanoseconds,
/// the time constants in microseconds; either constant may be infinite.
pub fn idle_channel(t1_us: f64, tphi_us: f64, t_ns: f64) -> Result<KrausChannel, NoiseError> {
    if t1_us.is_nan() || t1_us <= 0.0 {
        return Err(NoiseError::NonPositiveT1(t1_us));
    }
    let t_us = t_ns / 1000.0;
    let p_amp = if t1_us.is_infinite() { 0.0 } else { 1.0 - (-t_us / t1_us).exp() };
    let p_phi = if tphi_us.is_infinite() { 0.0 } else { (1.0 - (-t_us / tphi_us).exp()) / 2.0 };
    if p_amp == 0.0 && p_phi == 0.0 {
        return Ok(KrausChannel::identity(1));
    }
    let k0 = Matrix::from_real(2, &[1.0, 0.0, 0.0, (1.0 - p_amp).sqrt()]);
    let k1 = Matrix::from_real(2, &[0.0, p_amp.sqrt(), 0.0, 0.0]);
    let z = Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]);
    let keep = c((1.0 - p_phi).sqrt(), 0.0);
    let flip = c(p_phi.sqrt(), 0.0);
    let mut ops = vec![k0.scale(keep), k1.scale(keep)];
    if p_phi > 0.0 {
        ops.push((&z * &k0).scale(flip));
        ops.push((&z * &k1).scale(flip));
    }
    ops.retain(|m| m.data().iter().any(|&v| v != ZERO));
    Ok(KrausChannel { num_qubits: 1, ops })
}

/// Pure-dephasing time from `1/Tphi = 1/T2 - 1/(2 T1)`. Returns infinity
/// when the right-hand side is not positive.
pub fn tphi_from(t1_us: f64, t2_us: f64) -> f64 {
    let rate = 1.0 / t2_us - 1.0 / (2.0 * t1_us);
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Phase-flip channel applied to a spectator when a neighbour is measured.
pub fn mcm_spectator_channel(lambda: f64, dd_active: bool, dd_suppression: f64) -> KrausChannel {
    let effective = if dd_active { lambda * dd_suppression } else { lambda };
    phase_flip(effective.clamp(0.0, 1.0))
}

/// Applies one of the `4^k - 1` non-identity Paulis uniformly with total
/// probability `p`; the process infidelity of the channel equals `p`.
pub fn depolarizing_channel(num_qubits: usize, p: f64) -> KrausChannel {
    if p == 0.0 {
        return KrausChannel::identity(num_qubits);
    }
    let count = (1usize << (2 * num_qubits)) - 1;
    let mut ops = vec![Matrix::identity(1 << num_qubits).scale(c((1.0 - p).sqrt(), 0.0))];
    let w = c((p / count as f64).sqrt(), 0.0);
    for label in 1..=count {
        let mut m = Matrix::identity(1);
        // Highest qubit first so qubit 0 lands on the least-significant bit.
        for q in (0..num_qubits).rev() {
            m = m.kron(&pauli_matrix(((label >> (2 * q)) & 3) as u8));
        }
        ops.push(m.scale(w));
    }
    KrausChannel { num_qubits, ops }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        assert!(idle_channel(50.0, 20.0, 0.0).unwrap().is_identity());
    }

    #[test]
    fn amplitude_damping_after_one_t1() {
        let ch = idle_channel(96.6, f64::INFINITY, 96_600.0).unwrap();
        let p_amp = ch.ops[1][(0, 1)].norm_sqr();
        assert!((p_amp - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((p_amp - 0.632).abs() < 1e-3);
    }

    #[test]
    fn non_positive_t1_rejected() {
        assert!(idle_channel(0.0, 1.0, 1.0).is_err());
        assert!(idle_channel(-3.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tphi_relation() {
        assert!(tphi_from(40.0, 80.0).is_infinite());
        assert!(tphi_from(10.0, 25.0).is_infinite());
        let q5 = tphi_from(30.4, 33.0);
        let want = 1.0 / (1.0 / 33.0 - 1.0 / 60.8);
        assert!((q5 - want).abs() < 1e-12);
        assert!((q5 - 72.2).abs() < 0.05, "{q5}");
    }

    #[test]
    fn channels_are_complete() {
        for ch in [
            idle_channel(30.0, 12.0, 700.0).unwrap(),
            idle_channel(1.0, f64::INFINITY, 5000.0).unwrap(),
            mcm_spectator_channel(0.45, false, 1.0),
            mcm_spectator_channel(0.05, true, 0.3),
            depolarizing_channel(1, 0.01),
            depolarizing_channel(2, 0.3),
        ] {
            assert!(ch.completeness_error() < 1e-10);
        }
    }

    #[test]
    fn zero_lambda_is_identity() {
        assert!(mcm_spectator_channel(0.0, false, 1.0).is_identity());
    }
}
