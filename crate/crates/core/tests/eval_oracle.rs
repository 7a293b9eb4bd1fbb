mod support;

use haris_core::alpr::{average_precision, evaluate, pr_points, DetectionRecord};
use haris_core::sim::VehicleClass;
use proptest::prelude::*;
use support::eval_oracle::{oracle, random_instance};

#[test]
fn evaluator_matches_brute_force() {
    let (mut n_dets, mut n_tp) = (0, 0);
    for seed in 0..100 {
        let (dets, gts) = random_instance(seed, 6);
        let report = evaluate(&dets, &gts, 0.5);
        for class in VehicleClass::ALL {
            let d: Vec<_> = dets.iter().filter(|x| x.class == class).collect();
            let g: Vec<_> = gts.iter().filter(|x| x.class == class).collect();
            let want = oracle(&d, &g);
            match report.class(class) {
                Some(m) => {
                    assert_eq!(m.precision, want.precision, "seed {seed} {class:?} P");
                    assert_eq!(m.recall, want.recall, "seed {seed} {class:?} R");
                    assert_eq!(m.ap50, want.ap, "seed {seed} {class:?} AP");
                }
                None => assert!(d.is_empty() && g.is_empty()),
            }
        }
        let want = oracle(
            &dets.iter().collect::<Vec<_>>(),
            &gts.iter().collect::<Vec<_>>(),
        );
        assert_eq!(report.all.precision, want.precision, "seed {seed} all P");
        assert_eq!(report.all.recall, want.recall, "seed {seed} all R");
        assert_eq!(report.all.ap50, want.ap, "seed {seed} all AP");
        n_dets += report.all.detections;
        n_tp += report.all.true_positives;
    }
    assert!(
        n_dets > 500 && n_tp > 100 && n_tp < n_dets,
        "{n_dets} {n_tp}"
    );
}

proptest! {
    #[test]
    fn ap_depends_only_on_confidence_ranks(seed in 0u64..10_000, scale in 0.1f64..0.9, power in 0.3f64..3.0) {
        let (dets, gts) = random_instance(seed, 6);
        let warped: Vec<DetectionRecord> = dets
            .iter()
            .map(|d| DetectionRecord { confidence: scale * d.confidence.powf(power), ..d.clone() })
            .collect();
        let a = evaluate(&dets, &gts, 0.5);
        let b = evaluate(&warped, &gts, 0.5);
        prop_assert_eq!(a.all.ap50, b.all.ap50);
        prop_assert_eq!(a.map50, b.map50);
    }

    #[test]
    fn f1_is_harmonic_mean(seed in 0u64..10_000) {
        let (dets, gts) = random_instance(seed, 6);
        let report = evaluate(&dets, &gts, 0.5);
        for m in report.classes.iter().map(|(_, m)| m).chain(std::iter::once(&report.all)) {
            if let (Some(p), Some(r), Some(f1)) = (m.precision, m.recall, m.f1) {
                let want = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
                prop_assert!((f1 - want).abs() < 1e-9);
            }
            for v in [m.precision, m.recall, m.f1, m.ap50].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn envelope_curve_is_monotone(seed in 0u64..10_000) {
        let (dets, gts) = random_instance(seed, 6);
        let tp = haris_core::alpr::match_detections(&dets, &gts, 0.5);
        let conf: Vec<f64> = dets.iter().map(|d| d.confidence).collect();
        if !gts.is_empty() {
            let (_, curve) = average_precision(&pr_points(&conf, &tp, gts.len()));
            prop_assert!(curve.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 <= w[0].1));
        }
    }
}
