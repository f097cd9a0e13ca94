mod common;

use gan_ensemble::autodiff::{Norm, Tensor};
use gan_ensemble::config::DataConfig;
use gan_ensemble::critic::{self, CriticFunction, CriticInstance, LipschitzProgram};
use gan_ensemble::data::{self, LabeledDataset, Normalization, Scaler};
use gan_ensemble::metrics;
use gan_ensemble::networks::Variant;
use gan_ensemble::pipeline;
use gan_ensemble::scoring;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Scores drawn from a small grid so ties are common, with both classes present.
fn tied_instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..=50).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64 * 0.5), n),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_filter("both classes", |(_, l)| l.contains(&0) && l.contains(&1))
    })
}

fn distinct_instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..=50).prop_flat_map(|n| {
        (
            prop::collection::hash_set(-1_000_000i64..1_000_000, n)
                .prop_map(|s| s.into_iter().map(|v| v as f64 / 1000.0).collect::<Vec<_>>()),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_filter("both classes", |(_, l)| l.contains(&0) && l.contains(&1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn auroc_matches_pair_counting_and_roc_area((s, l) in tied_instance()) {
        let a = metrics::auroc(&s, &l).unwrap();
        prop_assert!((a - common::auroc_by_pairs(&s, &l)).abs() < 1e-12);
        let area = metrics::roc_curve(&s, &l).unwrap().area();
        prop_assert!((a - area).abs() < 1e-12);
    }

    #[test]
    fn auroc_is_a_rank_statistic((s, l) in tied_instance()) {
        let a = metrics::auroc(&s, &l).unwrap();
        let t: Vec<f64> = s.iter().map(|v| (v * 0.7).exp() - 3.0).collect();
        prop_assert!((a - metrics::auroc(&t, &l).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn negated_scores_complement_auroc((s, l) in distinct_instance()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let sum = metrics::auroc(&s, &l).unwrap() + metrics::auroc(&neg, &l).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prf_is_permutation_invariant((s, l) in tied_instance(), t in 0.0..4.0f64, rot in 0usize..50) {
        let k = rot % s.len();
        let (mut s2, mut l2) = (s.clone(), l.clone());
        s2.rotate_left(k);
        l2.rotate_left(k);
        s2.reverse();
        l2.reverse();
        prop_assert_eq!(
            metrics::prf_at_threshold(&s, &l, t).unwrap(),
            metrics::prf_at_threshold(&s2, &l2, t).unwrap()
        );
    }

    #[test]
    fn contamination_flags_ceiling_count_without_ties((s, _) in distinct_instance(), c in 0.001..0.999f64) {
        let t = metrics::threshold_by_contamination(&s, c).unwrap();
        let flagged = s.iter().filter(|&&v| v >= t).count();
        let raw = c * s.len() as f64;
        let want = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as usize;
        prop_assert_eq!(flagged, want.clamp(1, s.len()));
    }

    #[test]
    fn contamination_never_overflags_with_ties((s, _) in tied_instance(), c in 0.001..0.999f64) {
        let t = metrics::threshold_by_contamination(&s, c).unwrap();
        let flagged = s.iter().filter(|&&v| v >= t).count();
        prop_assert!(flagged <= metrics::contamination_count(s.len(), c));
        // lowering the threshold to the next score would exceed the count
        let below_max = s.iter().filter(|&&v| v < t).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let above_count = s.iter().filter(|&&v| v >= below_max).count();
        prop_assert!(above_count > metrics::contamination_count(s.len(), c) || below_max == f64::NEG_INFINITY);
    }
}

fn labels_strategy() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 2..80).prop_filter("has a normal row", |l| l.contains(&0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn split_partitions_rows_and_keeps_anomalies_out_of_train(
        labels in labels_strategy(),
        frac in 0.05..0.95f64,
        seed in any::<u64>(),
    ) {
        let split = data::anomaly_split_indices(&labels, frac, seed).unwrap();
        let n_normal = labels.iter().filter(|&&l| l == 0).count();
        let want = ((frac * n_normal as f64).round() as usize).clamp(1, n_normal);
        prop_assert_eq!(split.train.len(), want);
        prop_assert!(split.train.iter().all(|&i| labels[i] == 0));
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for (i, &l) in labels.iter().enumerate() {
            if l == 1 {
                prop_assert!(split.test.contains(&i));
            }
        }
        prop_assert_eq!(split.clone(), data::anomaly_split_indices(&labels, frac, seed).unwrap());
    }

    #[test]
    fn zscore_moments_and_minmax_range(rows in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 3), 2..40)) {
        let t = Tensor::from_rows(&rows).unwrap();
        let z = Scaler::fit(&t, Normalization::Zscore).unwrap();
        let zt = z.apply(&t).unwrap();
        let m = Scaler::fit(&t, Normalization::Minmax01).unwrap();
        let mt = m.apply(&t).unwrap();
        for c in 0..3 {
            let col: Vec<f64> = (0..rows.len()).map(|r| zt.row(r)[c]).collect();
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            if z.scale[c] > 0.0 {
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
            }
            for r in 0..rows.len() {
                let v = mt.row(r)[c];
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
        }
    }

    #[test]
    fn scaler_ignores_test_rows(seed in any::<u64>(), shift in -5.0..5.0f64) {
        let ds = data::make_synthetic(data::SyntheticKind::GaussianMixture, 40, 10, 3, seed % 1000).unwrap();
        let cfg = DataConfig { synthetic: None, ..DataConfig::default() };
        let before = pipeline::prepare_dataset(&ds, &cfg).unwrap();
        // anomalies always land in test; move them around
        let rows: Vec<Vec<f64>> = (0..ds.len())
            .map(|i| {
                let r = ds.row(i).to_vec();
                if ds.labels()[i] == 1 { r.iter().map(|v| v + shift).collect() } else { r }
            })
            .collect();
        let moved = LabeledDataset::from_rows(&rows, ds.labels().to_vec()).unwrap();
        let after = pipeline::prepare_dataset(&moved, &cfg).unwrap();
        prop_assert_eq!(before.scaler, after.scaler);
    }

    #[test]
    fn delimited_round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 4), 1..20)) {
        let labels: Vec<u8> = (0..rows.len()).map(|i| (i % 3 == 0) as u8).collect();
        let ds = LabeledDataset::from_rows(&rows, labels).unwrap();
        let mut buf = Vec::new();
        data::write_delimited(&ds, &mut buf, b',').unwrap();
        let back = data::read_delimited(buf.as_slice(), &data::LabelColumn::default(), b',').unwrap();
        prop_assert!(back.rows().bitwise_eq(ds.rows()));
        prop_assert_eq!(back.labels(), ds.labels());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scores_are_nonnegative_and_follow_row_order(seed in 0u64..1000, beta in 0.0..50.0f64) {
        let mut r = common::rng(seed);
        for variant in [Variant::FAnoGan, Variant::Egbad, Variant::Ganomaly] {
            let model = common::small_model(variant, 2, 2, 3, seed);
            let x = common::random_rows(&mut r, 6, 3, 2.0);
            let report = scoring::score_dataset(&common::tensor_of(&x), &model, Some(beta)).unwrap();
            prop_assert!(report.scores.iter().all(|&s| s >= 0.0));
            let rev: Vec<_> = x.iter().rev().cloned().collect();
            let back = scoring::score_dataset(&common::tensor_of(&rev), &model, Some(beta)).unwrap();
            let mut fwd = report.scores.clone();
            fwd.reverse();
            prop_assert_eq!(fwd, back.scores);
        }
    }

    #[test]
    fn pair_score_increases_with_beta(seed in 0u64..1000, b1 in 0.0..10.0f64, db in 0.01..10.0f64) {
        let model = common::small_model(Variant::FAnoGan, 1, 1, 2, seed);
        let (g, d) = (&model.generators[0], &model.discriminators[0]);
        let x = common::random_rows(&mut common::rng(seed), 1, 2, 2.0);
        let (_, ld, _) = common::terms(&x[0], g, d, Norm::L2);
        prop_assume!(ld > 0.0);
        let mut w = model.weights;
        w.beta = b1;
        let s1 = scoring::pair_score(&common::tensor_of(&x), g, d, &w, model.variant).unwrap();
        w.beta = b1 + db;
        let s2 = scoring::pair_score(&common::tensor_of(&x), g, d, &w, model.variant).unwrap();
        prop_assert!(s2 > s1);
    }
}

fn instance(seed: u64, dim: usize, norm: Norm) -> CriticInstance {
    CriticInstance::random(&mut ChaCha8Rng::seed_from_u64(seed), 6, 12, dim, norm)
}

fn norm_of(k: u8) -> Norm {
    if k == 0 { Norm::L1 } else { Norm::L2 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closed_form_is_lipschitz_on_a_grid(seed in any::<u64>(), dim in 1usize..=2, k in 0u8..2) {
        let inst = instance(seed, dim, norm_of(k));
        let grid: Vec<Vec<f64>> = if dim == 1 {
            (0..41).map(|i| vec![-2.5 + i as f64 * 0.125]).collect()
        } else {
            (0..121).map(|i| vec![-2.5 + (i % 11) as f64 * 0.5, -2.5 + (i / 11) as f64 * 0.5]).collect()
        };
        let values = grid
            .iter()
            .map(|p| critic::closed_form_critic(p, &inst.train, &inst.values, inst.norm).unwrap())
            .collect();
        let f = CriticFunction { points: grid, values };
        prop_assert!(critic::verify_lipschitz(&f, inst.norm, 1e-12).passed);
    }

    #[test]
    fn closed_form_is_the_smallest_lipschitz_extension(seed in any::<u64>(), dim in 1usize..=2, k in 0u8..2, obj_seed in any::<u64>()) {
        let inst = instance(seed, dim, norm_of(k));
        let oracle = critic::oracle_optimal_critic(&inst).unwrap();
        let n = inst.train.len();
        let xv = &oracle.function.values[..n];
        let points = inst.points();
        let mut r = ChaCha8Rng::seed_from_u64(obj_seed);
        let objective: Vec<f64> = (0..points.len())
            .map(|i| if i < n { 0.0 } else { rand::Rng::random_range(&mut r, -1.0..1.0) })
            .collect();
        let pinned: Vec<Option<f64>> = (0..points.len()).map(|i| (i < n).then(|| xv[i])).collect();
        let (g, _) = LipschitzProgram { points: &points, norm: inst.norm, objective: &objective, pinned: &pinned, anchor: &[] }
            .solve()
            .unwrap();
        for (s, p) in inst.support.iter().enumerate() {
            let floor = critic::closed_form_critic(p, &inst.train, xv, inst.norm).unwrap();
            prop_assert!(g[n + s] >= floor - 1e-7, "{} < {}", g[n + s], floor);
        }
    }

    #[test]
    fn oracle_objective_is_gauge_invariant(seed in any::<u64>(), dim in 1usize..=2, k in 0u8..2, shift in -10.0..10.0f64) {
        let inst = instance(seed, dim, norm_of(k));
        let oracle = critic::oracle_optimal_critic(&inst).unwrap();
        let mut shifted = oracle.function.clone();
        shifted.values.iter_mut().for_each(|v| *v += shift);
        prop_assert!((inst.objective(&oracle.function) - inst.objective(&shifted)).abs() < 1e-9);

        let points = inst.points();
        let n = inst.train.len();
        let mut objective = vec![1.0 / n as f64; n];
        objective.extend(inst.weights.iter().map(|w| -w));
        let mut pinned = vec![None; points.len()];
        pinned[0] = Some(shift);
        let (_, other) = LipschitzProgram { points: &points, norm: inst.norm, objective: &objective, pinned: &pinned, anchor: &[] }
            .solve()
            .unwrap();
        prop_assert!((other - oracle.objective).abs() < 1e-7);
    }

    #[test]
    fn theorem_check_passes_on_random_instances(seed in any::<u64>(), dim in 1usize..=2, k in 0u8..2) {
        let report = critic::check_theorem(&instance(seed, dim, norm_of(k)), 1e-3).unwrap();
        prop_assert!(report.passed, "deviation {}", report.max_deviation);
        prop_assert!(report.oracle_lipschitz.passed);
    }
}
