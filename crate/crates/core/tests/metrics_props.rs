use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sketchseg::metrics::{
    aggregate, eval_sample, lowess_smooth, mae, precision_at, saliency_suite, EvalRecord, PRECISION_THRESHOLDS,
};
use sketchseg::BinaryMask;

#[derive(Deserialize)]
struct Case {
    pred: Vec<Vec<f64>>,
    gt: Vec<Vec<u8>>,
    mae: f64,
    s_measure: f64,
    e_measure: f64,
    weighted_f: f64,
}

fn load_cases() -> Vec<Case> {
    let text = include_str!("fixtures/saliency_cases.json");
    serde_json::from_str(text).unwrap()
}

fn to_inputs(c: &Case) -> (Array2<f64>, BinaryMask) {
    let (h, w) = (c.pred.len(), c.pred[0].len());
    let pred = Array2::from_shape_fn((h, w), |(y, x)| c.pred[y][x]);
    let bits: Vec<u8> = c.gt.iter().flatten().copied().collect();
    (pred, BinaryMask::from_bits(w, h, &bits).unwrap())
}

#[test]
fn saliency_matches_the_reference_cases() {
    let cases = load_cases();
    assert_eq!(cases.len(), 10);
    for (i, c) in cases.iter().enumerate() {
        let (pred, gt) = to_inputs(c);
        let s = saliency_suite(pred.view(), &gt).unwrap();
        for (name, got, want) in [
            ("mae", s.mae, c.mae),
            ("s_measure", s.s_measure, c.s_measure),
            ("e_measure", s.e_measure, c.e_measure),
            ("weighted_f", s.weighted_f, c.weighted_f),
        ] {
            assert!((got - want).abs() < 1e-6, "case {i} {name}: {got} vs {want}");
        }
    }
}

#[test]
fn perfect_predictions_score_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut records = Vec::new();
    for i in 0..5 {
        let bits: Vec<bool> = (0..32 * 32).map(|_| rng.random_bool(0.4)).collect();
        let gt = BinaryMask::from_bools(32, 32, bits).unwrap();
        records.push(eval_sample(&gt, &gt, &format!("s{i}")).unwrap());
        let soft = Array2::from_shape_fn((32, 32), |(y, x)| if gt.get(x, y) { 1.0 } else { 0.0 });
        let s = saliency_suite(soft.view(), &gt).unwrap();
        assert_eq!(s.mae, 0.0);
        assert!((s.weighted_f - 1.0).abs() < 1e-9);
        assert!((s.s_measure - 1.0).abs() < 1e-9);
    }
    let report = aggregate(&records).unwrap();
    assert_eq!(report.oiou, 100.0);
    assert_eq!(report.miou, 100.0);
    assert!(report.p_at.values().all(|&v| v == 100.0));
}

fn record(i: u64, u: u64) -> EvalRecord {
    EvalRecord::from_counts("r", i, u, i).unwrap()
}

proptest! {
    #[test]
    fn precision_is_monotone_in_the_threshold(
        counts in proptest::collection::vec((0u64..50, 0u64..50), 1..40)
    ) {
        let records: Vec<_> = counts.iter().map(|&(i, extra)| record(i, i + extra)).collect();
        let report = aggregate(&records).unwrap();
        let values: Vec<f64> = PRECISION_THRESHOLDS.iter().map(|x| report.p_at[&x.to_string()]).collect();
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(values.iter().all(|v| (0.0..=100.0).contains(v)));
        prop_assert!((0.0..=100.0).contains(&report.oiou) && (0.0..=100.0).contains(&report.miou));
        let all_perfect = records.iter().all(|r| r.iou == 1.0);
        prop_assert_eq!(report.miou == 100.0, all_perfect);
        prop_assert_eq!(precision_at(&records, 0.0), 100.0);
    }

    #[test]
    fn mae_of_complements_sums_to_one(
        vals in proptest::collection::vec(0.0f64..=1.0, 64),
        bits in proptest::collection::vec(any::<bool>(), 64)
    ) {
        let pred = Array2::from_shape_vec((8, 8), vals).unwrap();
        let gt = BinaryMask::from_bools(8, 8, bits).unwrap();
        let a = mae(pred.view(), &gt).unwrap();
        let b = mae(pred.mapv(|v| 1.0 - v).view(), &gt).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lowess_is_affine_equivariant_in_y(
        ys in proptest::collection::vec(-5.0f64..5.0, 10..40),
        a in -3.0f64..3.0,
        b in -10.0f64..10.0,
        frac in 0.1f64..=1.0
    ) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * 0.7, y)).collect();
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, a * y + b)).collect();
        let f = lowess_smooth(&pts, frac).unwrap();
        let g = lowess_smooth(&mapped, frac).unwrap();
        for ((_, fy), (_, gy)) in f.iter().zip(&g) {
            prop_assert!((a * fy + b - gy).abs() < 1e-9);
        }
    }

    #[test]
    fn lowess_reproduces_lines_at_full_span(
        slope in -4.0f64..4.0,
        intercept in -50.0f64..50.0,
        xs in proptest::collection::btree_set(0u32..10_000, 2..60)
    ) {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (f64::from(x), slope * f64::from(x) + intercept)).collect();
        for (x, y) in lowess_smooth(&pts, 1.0).unwrap() {
            prop_assert!((y - (slope * x + intercept)).abs() < 1e-9);
        }
    }
}

#[test]
fn lowess_beats_a_global_line_on_a_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let truth = |x: f64| 0.05 * (x - 50.0).powi(2);
    let pts: Vec<(f64, f64)> = (0..200)
        .map(|i| {
            let x = i as f64 * 0.5;
            (x, truth(x) + rng.random_range(-5.0..5.0))
        })
        .collect();
    let fitted = lowess_smooth(&pts, 0.2).unwrap();
    let rmse = |f: &dyn Fn(f64) -> f64| {
        (pts.iter().map(|&(x, _)| (f(x) - truth(x)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt()
    };
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / pts.iter().map(|&(x, _)| (x - mx).powi(2)).sum::<f64>();
    let global = rmse(&|x| my + slope * (x - mx));
    let local = (fitted.iter().map(|&(x, y)| (y - truth(x)).powi(2)).sum::<f64>() / n).sqrt();
    assert!(local < global, "lowess {local} vs line {global}");
}
