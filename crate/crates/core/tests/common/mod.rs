//! Slow, obviously-correct reference implementations and random cohorts.
#![allow(dead_code)]

use cama_core::{Cohort, ScoreRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// Pairwise double loop: 1 per won pair, 1/2 per tie.
pub fn brute_auroc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    credit / pairs
}

/// Enumerates every distinct threshold in descending order and accumulates
/// `(R_k - R_{k-1}) * P_k`, counting samples with `p >= t` as predicted positive.
pub fn brute_auprc_probs(labels: &[u8], probs: &[f64]) -> f64 {
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let mut thresholds = probs.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let mut tp = 0.0;
        let mut fp = 0.0;
        for (&y, &p) in labels.iter().zip(probs) {
            if p >= t {
                if y == 1 {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        let recall = tp / n_pos;
        area += (recall - prev_recall) * (tp / (tp + fp));
        prev_recall = recall;
    }
    area
}

pub fn brute_auprc(labels: &[u8], logits: &[f64]) -> f64 {
    let probs: Vec<f64> = logits.iter().map(|&s| sigmoid(s)).collect();
    brute_auprc_probs(labels, &probs)
}

pub fn cohort(labels: &[u8], avail: &[f64], acquired: &[f64]) -> Cohort {
    Cohort::new(
        (0..labels.len())
            .map(|i| ScoreRecord {
                id: i as u64,
                label: labels[i],
                s_avail: avail[i],
                s_acquired: acquired[i],
                s_imp: vec![],
            })
            .collect(),
    )
    .unwrap()
}

/// Labels with both classes present.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    assert!(n >= 2);
    let mut y: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < 0.4)).collect();
    y[0] = 1;
    y[1] = 0;
    y
}

/// Either continuous logits or a coarse lattice that produces many ties.
pub fn random_scores(rng: &mut ChaCha8Rng, n: usize, tied: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if tied {
                rng.random_range(-3i32..=3) as f64 * 0.5
            } else {
                rng.random_range(-4.0..4.0)
            }
        })
        .collect()
}

pub fn random_cohort(rng: &mut ChaCha8Rng, n: usize) -> Cohort {
    let tied = rng.random::<bool>();
    let y = random_labels(rng, n);
    let avail = random_scores(rng, n, tied);
    let acquired = random_scores(rng, n, tied);
    cohort(&y, &avail, &acquired)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Score vector with `subset` moved to their acquired scores.
pub fn substituted(c: &Cohort, subset: &[usize]) -> Vec<f64> {
    let mut s = c.s_avail().to_vec();
    for &i in subset {
        s[i] = c.s_acquired()[i];
    }
    s
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}
