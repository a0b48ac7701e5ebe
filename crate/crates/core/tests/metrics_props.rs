mod common;

use cama_core::metrics::{
    auprc, auroc, bernoulli_kl_of, binary_entropy_of, sigmoid, LabeledScores, ScoreScale,
};
use common::{brute_auprc, brute_auprc_probs, brute_auroc};
use proptest::prelude::*;

fn labelled(max_n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    (2..max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..=1, n),
            // half-integer lattice so ties are common
            prop::collection::vec((-8i32..=8).prop_map(|k| k as f64 * 0.5), n),
        )
    })
}

fn both_classes(y: &[u8]) -> bool {
    y.contains(&0) && y.contains(&1)
}

proptest! {
    #[test]
    fn auroc_matches_pair_loop((y, s) in labelled(60)) {
        prop_assume!(both_classes(&y));
        let got = auroc(&LabeledScores::new(&y, &s).unwrap()).unwrap();
        prop_assert!((got - brute_auroc(&y, &s)).abs() <= 1e-12);
    }

    #[test]
    fn auprc_matches_threshold_enumeration((y, s) in labelled(60)) {
        prop_assume!(y.contains(&1));
        let got = auprc(&LabeledScores::new(&y, &s).unwrap(), ScoreScale::Logit).unwrap();
        prop_assert!((got - brute_auprc(&y, &s)).abs() <= 1e-12);
    }

    #[test]
    fn probability_and_logit_scales_agree((y, s) in labelled(40)) {
        prop_assume!(y.contains(&1));
        let p: Vec<f64> = s.iter().map(|&v| sigmoid(v).unwrap().value()).collect();
        let a = auprc(&LabeledScores::new(&y, &s).unwrap(), ScoreScale::Logit).unwrap();
        let b = auprc(&LabeledScores::new(&y, &p).unwrap(), ScoreScale::Probability).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((b - brute_auprc_probs(&y, &p)).abs() <= 1e-12);
    }

    #[test]
    fn metrics_ignore_sample_order((y, s) in labelled(40), seed in any::<u64>()) {
        prop_assume!(both_classes(&y));
        let mut idx: Vec<usize> = (0..y.len()).collect();
        let mut rng = common::rng(seed);
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let y2: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
        let s2: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
        let a = LabeledScores::new(&y, &s).unwrap();
        let b = LabeledScores::new(&y2, &s2).unwrap();
        prop_assert_eq!(auroc(&a).unwrap(), auroc(&b).unwrap());
        let (pa, pb) = (auprc(&a, ScoreScale::Logit).unwrap(), auprc(&b, ScoreScale::Logit).unwrap());
        prop_assert!((pa - pb).abs() <= 1e-12);
    }

    #[test]
    fn auroc_invariant_under_monotone_transform((y, s) in labelled(40), scale in 0.1f64..5.0, shift in -3.0f64..3.0) {
        prop_assume!(both_classes(&y));
        let t: Vec<f64> = s.iter().map(|&v| (scale * v + shift).tanh() * 7.0 + v.powi(3)).collect();
        let a = auroc(&LabeledScores::new(&y, &s).unwrap()).unwrap();
        let b = auroc(&LabeledScores::new(&y, &t).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn flipping_scores_mirrors_auroc((y, s) in labelled(40)) {
        prop_assume!(both_classes(&y));
        let neg: Vec<f64> = s.iter().map(|&v| -v).collect();
        let a = auroc(&LabeledScores::new(&y, &s).unwrap()).unwrap();
        let b = auroc(&LabeledScores::new(&y, &neg).unwrap()).unwrap();
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn metrics_are_in_unit_interval((y, s) in labelled(40)) {
        prop_assume!(both_classes(&y));
        let d = LabeledScores::new(&y, &s).unwrap();
        let a = auroc(&d).unwrap();
        let p = auprc(&d, ScoreScale::Logit).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn entropy_is_symmetric_and_bounded(p in 0.0f64..=1.0) {
        let h = binary_entropy_of(p).unwrap();
        let h2 = binary_entropy_of(1.0 - p).unwrap();
        prop_assert!((h - h2).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_diagonal(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        prop_assert!(bernoulli_kl_of(p, q).unwrap() >= 0.0);
        prop_assert!(bernoulli_kl_of(p, p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn sigmoid_is_monotone_and_symmetric(a in -40.0f64..40.0, b in -40.0f64..40.0) {
        let (pa, pb) = (sigmoid(a).unwrap().value(), sigmoid(b).unwrap().value());
        if a < b {
            prop_assert!(pa <= pb);
        }
        let mirror = sigmoid(-a).unwrap().value();
        prop_assert!((pa + mirror - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn kl_is_finite_at_saturated_q() {
    for (p, q) in [(0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (0.0, 1.0)] {
        let kl = bernoulli_kl_of(p, q).unwrap();
        assert!(kl.is_finite() && kl > 0.0, "KL({p}, {q}) = {kl}");
    }
}

#[test]
fn metric_errors() {
    let y = [1u8, 1];
    let s = [0.0, 1.0];
    let d = LabeledScores::new(&y, &s).unwrap();
    assert!(auroc(&d).is_err());
    assert!(LabeledScores::new(&[1, 0], &[f64::NAN, 0.0]).is_err());
    assert!(LabeledScores::new(&[2, 0], &[0.0, 0.0]).is_err());
    assert!(LabeledScores::new(&[1], &[0.0, 1.0]).is_err());
    let y0 = [0u8, 0];
    assert!(auprc(&LabeledScores::new(&y0, &s).unwrap(), ScoreScale::Logit).is_err());
    assert!(sigmoid(f64::INFINITY).is_err());
    assert!(binary_entropy_of(1.5).is_err());
}
