use super::ReadoutFidelity;
use crate::engine::Distribution;
use rand::Rng;

/// Reports a measured bit through an imperfect discriminator.
pub fn flip_readout<R: Rng + ?Sized>(bit: bool, fidelity: &ReadoutFidelity, rng: &mut R) -> bool {
    let p_correct = if bit { fidelity.p11 } else { fidelity.p00 };
    if rng.gen::<f64>() < p_correct {
        bit
    } else {
        !bit
    }
}

/// Exact readout confusion on a distribution: bit `i` of every key is pushed
/// through `per_bit[i]` independently (the tensor product of per-bit
/// stochastic matrices). Shot counts are discarded.
pub fn apply_readout_confusion(dist: &Distribution, per_bit: &[ReadoutFidelity]) -> Distribution {
    let mut current: Vec<(u64, f64)> = dist.probabilities().collect();
    for (bit, f) in per_bit.iter().enumerate() {
        if f.is_perfect() {
            continue;
        }
        let mut next = std::collections::BTreeMap::new();
        for (key, p) in current {
            let value = (key >> bit) & 1 == 1;
            let keep = if value { f.p11 } else { f.p00 };
            *next.entry(key).or_insert(0.0) += p * keep;
            *next.entry(key ^ (1 << bit)).or_insert(0.0) += p * (1.0 - keep);
        }
        current = next.into_iter().collect();
    }
    Distribution::from_probabilities(dist.width(), current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_readout_is_identity() {
        let d = Distribution::from_probabilities(2, vec![(0b01, 0.3), (0b10, 0.7)]);
        let out = apply_readout_confusion(&d, &[ReadoutFidelity::perfect(0), ReadoutFidelity::perfect(1)]);
        assert_eq!(out.probability(0b01), 0.3);
        assert_eq!(out.probability(0b10), 0.7);
    }

    #[test]
    fn q0_confusion_on_zero() {
        let d = Distribution::from_probabilities(1, vec![(0, 1.0)]);
        let out = apply_readout_confusion(&d, &[ReadoutFidelity { qubit: 0, p00: 0.995, p11: 0.983 }]);
        assert!((out.probability(0) - 0.995).abs() < 1e-15);
        assert!((out.probability(1) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn symmetric_confusion_keeps_uniform() {
        let d = Distribution::from_probabilities(2, (0..4).map(|k| (k, 0.25)));
        let f = ReadoutFidelity { qubit: 0, p00: 0.9, p11: 0.9 };
        let out = apply_readout_confusion(&d, &[f, f]);
        for k in 0..4 {
            assert!((out.probability(k) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn bit_level_flip_rate() {
        let f = ReadoutFidelity { qubit: 0, p00: 0.9, p11: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let flips = (0..20_000).filter(|_| flip_readout(false, &f, &mut rng)).count();
        assert!((flips as f64 / 20_000.0 - 0.1).abs() < 0.01);
        assert!((0..1000).all(|_| flip_readout(true, &f, &mut rng)));
    }
}
