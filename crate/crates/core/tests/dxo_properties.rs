use proptest::prelude::*;
use xrisk_core::dxo::{
    kl_dro_aggregate, objective_gradient, objective_value, pauc_objective, DxoConfig, FeatureDataset, FeatureSample,
    Objective, Scorer,
};
use xrisk_core::xrisk::partial_auc;
use xrisk_core::Label;

fn losses() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..20)
}

fn lambda() -> impl Strategy<Value = f64> {
    prop_oneof![1e-4..1e-2f64, 0.01..10.0f64, 10.0..1e4f64]
}

fn dataset(dim: usize) -> impl Strategy<Value = FeatureDataset> {
    let rows = |n| prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), 1..=n);
    (rows(6), rows(8)).prop_map(|(pos, neg)| {
        let samples = pos
            .into_iter()
            .enumerate()
            .map(|(i, f)| FeatureSample::new(format!("p{i}"), f, Label::Positive))
            .chain(
                neg.into_iter()
                    .enumerate()
                    .map(|(i, f)| FeatureSample::new(format!("n{i}"), f, Label::Negative)),
            )
            .collect();
        FeatureDataset::new(samples).unwrap()
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aggregate_is_bounded(ls in losses(), lam in lambda()) {
        let v = kl_dro_aggregate(&ls, lam);
        let mean = ls.iter().sum::<f64>() / ls.len() as f64;
        let max = ls.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!(v >= mean - 1e-9 * (1.0 + mean.abs()), "{v} < mean {mean}");
        prop_assert!(v <= max + 1e-12, "{v} > max {max}");
    }

    #[test]
    fn aggregate_is_monotone(ls in losses(), lam in lambda(), k in any::<prop::sample::Index>(), bump in 0.0..3.0f64) {
        let mut raised = ls.clone();
        let i = k.index(ls.len());
        raised[i] += bump;
        prop_assert!(kl_dro_aggregate(&raised, lam) >= kl_dro_aggregate(&ls, lam) - 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences(
        data in dataset(3),
        w in prop::collection::vec(-1.0..1.0f64, 4),
        lam in 0.3..3.0f64,
        lam2 in 0.3..3.0f64,
        tp in any::<bool>(),
    ) {
        let cfg = DxoConfig {
            objective: if tp { Objective::TpaucKl } else { Objective::PaucKl },
            lambda: lam,
            lambda_prime: lam2,
            ..Default::default()
        };
        let scorer = Scorer::linear(w[..3].to_vec(), w[3]).unwrap();
        let grad = objective_gradient(&scorer, &data, &cfg).unwrap();
        for (k, &g) in grad.iter().enumerate() {
            let (mut up, mut dn) = (scorer.clone(), scorer.clone());
            up.params_mut()[k] += 1e-5;
            dn.params_mut()[k] -= 1e-5;
            let fd = (objective_value(&up, &data, &cfg).unwrap() - objective_value(&dn, &data, &cfg).unwrap()) / 2e-5;
            prop_assert!(rel_err(g, fd) <= 1e-4, "param {k}: {g} vs {fd}");
        }
    }

    #[test]
    fn zero_surrogate_means_full_pauc(
        pos in prop::collection::vec(2.0..5.0f64, 1..10),
        neg in prop::collection::vec(-5.0..0.9f64, 1..10),
        beta in 0.01..=1.0f64,
    ) {
        let samples: Vec<FeatureSample> = pos
            .iter()
            .enumerate()
            .map(|(i, &x)| FeatureSample::new(format!("p{i}"), vec![x], Label::Positive))
            .chain(neg.iter().enumerate().map(|(i, &x)| FeatureSample::new(format!("n{i}"), vec![x], Label::Negative)))
            .collect();
        let data = FeatureDataset::new(samples).unwrap();
        let scorer = Scorer::linear(vec![1.0], 0.0).unwrap();
        let obj = pauc_objective(&scorer, &data, &DxoConfig::default()).unwrap();
        prop_assume!(obj == 0.0);
        let set = data.score_set(&scorer).unwrap();
        prop_assert_eq!(partial_auc(&set, beta).unwrap(), 100.0);
    }
}
