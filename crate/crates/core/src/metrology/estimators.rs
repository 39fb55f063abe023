use super::{MetrologyError, Ptm, TruthTable};
use crate::engine::Distribution;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const TOL: f64 = 1e-9;

fn check_unit(name: &str, v: f64) -> Result<(), MetrologyError> {
    if !(-TOL..=1.0 + TOL).contains(&v) || v.is_nan() {
        return Err(MetrologyError::InvalidInput(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

/// GHZ fidelity estimate and whether it certifies genuine multipartite
/// entanglement (strictly above one half).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzFidelity {
    pub value: f64,
    pub genuine: bool,
}

/// `F = (P(0…0) + P(1…1) + C) / 2`.
pub fn ghz_fidelity(p_all0: f64, p_all1: f64, coherence: f64) -> Result<GhzFidelity, MetrologyError> {
    check_unit("P(all 0)", p_all0)?;
    check_unit("P(all 1)", p_all1)?;
    check_unit("C", coherence)?;
    if p_all0 + p_all1 > 1.0 + TOL {
        return Err(MetrologyError::InvalidInput(format!("populations sum to {}", p_all0 + p_all1)));
    }
    let value = (p_all0 + p_all1 + coherence) / 2.0;
    Ok(GhzFidelity { value, genuine: value > 0.5 })
}

/// Which two-qubit target a parity fit is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellSign {
    /// `Φ+`: coherence in phase with the ideal GHZ oscillation.
    Plus,
    /// `Φ−`: coherence shifted by π.
    Minus,
}

/// Bell-state fidelity from populations and the signed coherence of a parity
/// fit ([`super::ParityFit::signed`]).
pub fn bell_fidelity_from_parity(
    p00: f64,
    p11: f64,
    signed_coherence: f64,
    sign: BellSign,
) -> Result<GhzFidelity, MetrologyError> {
    let c = match sign {
        BellSign::Plus => signed_coherence,
        BellSign::Minus => -signed_coherence,
    };
    ghz_fidelity(p00, p11, c.clamp(0.0, 1.0))
}

/// `(1/d) Tr(S_expᵀ S_ideal)`.
pub fn truth_table_fidelity(exp: &TruthTable, ideal: &TruthTable) -> Result<f64, MetrologyError> {
    if exp.dim() != ideal.dim() {
        return Err(MetrologyError::DimensionMismatch { expected: ideal.dim(), found: exp.dim() });
    }
    let d = exp.dim();
    let sum: f64 =
        exp.columns.iter().zip(&ideal.columns).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y)).sum();
    Ok(sum / d as f64)
}

/// Total variation distance `½ Σ |p_k − q_k|`; keys missing from one side
/// count as zero.
pub fn tvd(p: &Distribution, q: &Distribution) -> Result<f64, MetrologyError> {
    p.check_normalized(1e-9)?;
    q.check_normalized(1e-9)?;
    let keys: BTreeSet<u64> = p.support().chain(q.support()).collect();
    Ok(0.5 * keys.iter().map(|&k| (p.probability(k) - q.probability(k)).abs()).sum::<f64>())
}

/// Process infidelity from average infidelity: `e_F = ((d+1)/d) r`,
/// `d = 2^n`.
pub fn ef_from_r(r: f64, n: u32) -> f64 {
    let d = (1u64 << n) as f64;
    r + r / d
}

/// Inverse of [`ef_from_r`].
pub fn r_from_ef(ef: f64, n: u32) -> f64 {
    let d = (1u64 << n) as f64;
    ef * d / (d + 1.0)
}

/// `Tr(R_idealᵀ R_exp) / 4`.
pub fn process_fidelity_from_ptm(exp: &Ptm, ideal: &Ptm) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += ideal.r[i][j] * exp.r[i][j];
        }
    }
    s / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_examples() {
        assert_eq!(ghz_fidelity(0.5, 0.5, 1.0).unwrap().value, 1.0);
        let f = ghz_fidelity(0.4, 0.4, 0.2).unwrap();
        assert_eq!(f.value, 0.5);
        assert!(!f.genuine);
        assert!(ghz_fidelity(0.7, 0.7, 0.0).is_err());
        assert!(ghz_fidelity(-0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn bell_sign_relabels_phase() {
        let plus = bell_fidelity_from_parity(0.5, 0.5, 0.8, BellSign::Plus).unwrap();
        let minus = bell_fidelity_from_parity(0.5, 0.5, -0.8, BellSign::Minus).unwrap();
        assert_eq!(plus, minus);
        assert!((plus.value - 0.9).abs() < 1e-15);
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(ef_from_r(0.0, 1), 0.0);
        assert_eq!(ef_from_r(0.001, 1), 0.0015);
        assert!((r_from_ef(0.014, 2) - 0.0112).abs() < 1e-15);
        for &r in &[0.0, 1e-4, 0.003, 0.25, 1.0] {
            for n in 1..4 {
                assert!((r_from_ef(ef_from_r(r, n), n) - r).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tvd_examples() {
        let p = Distribution::from_probabilities(1, [(0, 0.881), (1, 0.119)]);
        assert!((tvd(&p, &Distribution::point(1, 0)).unwrap() - 0.119).abs() < 1e-12);
        assert_eq!(tvd(&Distribution::point(1, 0), &Distribution::point(1, 1)).unwrap(), 1.0);
        assert_eq!(tvd(&p, &p).unwrap(), 0.0);
        assert!(tvd(&Distribution::from_probabilities(1, [(0, 0.5)]), &p).is_err());
    }

    #[test]
    fn ptm_fidelity_examples() {
        let id = Ptm::identity();
        assert_eq!(process_fidelity_from_ptm(&id, &id), 1.0);
        assert_eq!(process_fidelity_from_ptm(&Ptm::diagonal([1.0, 0.0, 0.0, 1.0]), &id), 0.5);
        assert!((process_fidelity_from_ptm(&Ptm::diagonal([1.0, 0.5, 0.5, 0.9]), &id) - 0.725).abs() < 1e-15);
    }
}
