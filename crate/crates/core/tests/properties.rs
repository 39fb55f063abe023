use ffwd::circuit::{Circuit, Gate};
use ffwd::engine::Distribution;
use ffwd::metrology::{
    ef_from_r, ghz_fidelity, ghz_fidelity_experiment, process_fidelity_from_ptm, ptm_from_bloch, r_from_ef, tvd,
    Ptm, Runner,
};
use proptest::prelude::*;

fn distribution(width: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, 1 << width).prop_filter_map("all zero", move |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-6).then(|| Distribution::from_probabilities(width, w.iter().enumerate().map(|(k, &x)| (k as u64, x / total))))
    })
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

fn blochs() -> impl Strategy<Value = [[f64; 3]; 4]> {
    [bloch(), bloch(), bloch(), bloch()]
}

fn close(a: &Ptm, b: &Ptm) -> bool {
    a.r.iter().flatten().zip(b.r.iter().flatten()).all(|(x, y)| (x - y).abs() < 1e-12)
}

proptest! {
    #[test]
    fn tvd_is_a_metric(p in distribution(3), q in distribution(3), r in distribution(3)) {
        let pq = tvd(&p, &q).unwrap();
        prop_assert!(tvd(&p, &p).unwrap().abs() < 1e-12);
        prop_assert!((pq - tvd(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!(pq <= tvd(&p, &r).unwrap() + tvd(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn distribution_json_round_trips(p in distribution(4)) {
        let back = Distribution::from_json(&p.to_json()).unwrap();
        prop_assert!(tvd(&p, &back).unwrap() < 1e-12);
    }

    #[test]
    fn ptm_reconstruction_is_linear(a in blochs(), b in blochs(), w in 0.0f64..1.0) {
        let mut mixed = [[0.0; 3]; 4];
        for i in 0..4 {
            for k in 0..3 {
                mixed[i][k] = w * a[i][k] + (1.0 - w) * b[i][k];
            }
        }
        let lhs = ptm_from_bloch(&mixed);
        let rhs = ptm_from_bloch(&a).mix(&ptm_from_bloch(&b), w);
        prop_assert!(close(&lhs, &rhs));
        let ideal = Ptm::identity();
        let f = process_fidelity_from_ptm(&lhs, &ideal);
        let g = w * process_fidelity_from_ptm(&ptm_from_bloch(&a), &ideal)
            + (1.0 - w) * process_fidelity_from_ptm(&ptm_from_bloch(&b), &ideal);
        prop_assert!((f - g).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_ptm_fidelity(f in 0.0f64..1.0) {
        let ptm = Ptm::diagonal([1.0, f, f, f]);
        let expected = (1.0 + 3.0 * f) / 4.0;
        prop_assert!((process_fidelity_from_ptm(&ptm, &Ptm::identity()) - expected).abs() < 1e-12);
    }

    #[test]
    fn infidelity_conversion_round_trips(r in 0.0f64..0.5, n in 1u32..6) {
        let ef = ef_from_r(r, n);
        prop_assert!(ef >= r);
        prop_assert!((r_from_ef(ef, n) - r).abs() <= 1e-15);
    }

    #[test]
    fn ghz_fidelity_is_the_population_coherence_average(p0 in 0.0f64..0.5, p1 in 0.0f64..0.5, c in 0.0f64..1.0) {
        let f = ghz_fidelity(p0, p1, c).unwrap();
        prop_assert!((f.value - (p0 + p1 + c) / 2.0).abs() < 1e-15);
        prop_assert_eq!(f.genuine, f.value > 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Parity-oscillation estimate against the closed-form fidelity of
    /// `cos a |0…0⟩ + sin a |1…1⟩`, which is `(1 + sin 2a) / 2`.
    #[test]
    fn parity_estimate_matches_unbalanced_ghz(n in 2usize..=4, a in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let mut prep = Circuit::new(n, 0);
        prep.gate(Gate::Ry(2.0 * a), &[0]);
        for q in 1..n {
            prep.cnot(q - 1, q);
        }
        let data: Vec<usize> = (0..n).collect();
        let report = ghz_fidelity_experiment(&prep, &data, None, &Runner::exact(None)).unwrap();
        let expected = (1.0 + (2.0 * a).sin()) / 2.0;
        prop_assert!((report.fidelity.value - expected).abs() < 1e-9, "{} vs {}", report.fidelity.value, expected);
        prop_assert!((report.p_all0 - a.cos().powi(2)).abs() < 1e-9);
    }
}
