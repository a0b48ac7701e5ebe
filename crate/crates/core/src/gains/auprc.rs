//! Greedy AUPRC oracle engine.
//!
//! The step sum can be rewritten as `(1/N+) * sum_k pos_k * TP_k / n_k` over
//! threshold slots `k`, where `TP_k` and `n_k` count positives and all samples
//! scoring at or above slot `k`. A single sample moving from slot `c` to slot
//! `a` shifts `TP`/`n` by one on the slots strictly between them (and on the
//! far endpoint), so every candidate's gain is a difference of prefix sums over
//! per-slot deltas plus a correction for the mover's own term.
//!
//! Slots are the sorted union of all `sigmoid(s_avail)` and
//! `sigmoid(s_acquired)` values, fixed for the whole run. One greedy step
//! rebuilds the prefix tables in O(slots) and scores all candidates in O(N).

use super::GreedyEngine;
use crate::cohort::Cohort;
use crate::error::{CamaError, Result};
use crate::metrics::{cmp_finite, sigmoid_unchecked};

#[inline]
fn ratio(num: i64, den: i64) -> f64 {
    if den <= 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) struct AuprcEngine<'c> {
    labels: &'c [u8],
    from_slot: Vec<usize>,
    to_slot: Vec<usize>,
    acquired: Vec<bool>,
    pos_at: Vec<i64>,
    all_at: Vec<i64>,
    // counts at or above each slot, for the current state
    tp_ge: Vec<i64>,
    n_ge: Vec<i64>,
    // prefix sums (index k holds the sum over slots < k) of pos_k times the
    // change of TP_k / n_k for the four ways a mover can cross slot k
    neg_up: Vec<f64>,
    neg_down: Vec<f64>,
    pos_up: Vec<f64>,
    pos_down: Vec<f64>,
    n_pos: f64,
    metric: f64,
}

impl<'c> AuprcEngine<'c> {
    pub(crate) fn new(cohort: &'c Cohort) -> Result<Self> {
        if cohort.n_positive() == 0 {
            return Err(CamaError::UndefinedMetric(
                "AUPRC needs at least one positive sample".into(),
            ));
        }
        let p_from: Vec<f64> = cohort.s_avail().iter().map(|&s| sigmoid_unchecked(s)).collect();
        let p_to: Vec<f64> = cohort.s_acquired().iter().map(|&s| sigmoid_unchecked(s)).collect();
        let mut domain: Vec<f64> = p_from.iter().chain(&p_to).copied().collect();
        domain.sort_unstable_by(|a, b| cmp_finite(*a, *b));
        domain.dedup();
        let slot = |p: f64| {
            domain
                .binary_search_by(|probe| cmp_finite(*probe, p))
                .expect("value is in its own domain")
        };
        let from_slot: Vec<usize> = p_from.iter().map(|&p| slot(p)).collect();
        let to_slot: Vec<usize> = p_to.iter().map(|&p| slot(p)).collect();

        let d = domain.len();
        let mut pos_at = vec![0; d];
        let mut all_at = vec![0; d];
        for (&y, &k) in cohort.labels().iter().zip(&from_slot) {
            pos_at[k] += y as i64;
            all_at[k] += 1;
        }
        let mut engine = AuprcEngine {
            labels: cohort.labels(),
            from_slot,
            to_slot,
            acquired: vec![false; cohort.len()],
            pos_at,
            all_at,
            tp_ge: vec![0; d],
            n_ge: vec![0; d],
            neg_up: vec![0.0; d + 1],
            neg_down: vec![0.0; d + 1],
            pos_up: vec![0.0; d + 1],
            pos_down: vec![0.0; d + 1],
            n_pos: cohort.n_positive() as f64,
            metric: 0.0,
        };
        engine.refresh();
        Ok(engine)
    }

    fn refresh(&mut self) {
        let d = self.pos_at.len();
        let (mut tp, mut n) = (0i64, 0i64);
        for k in (0..d).rev() {
            tp += self.pos_at[k];
            n += self.all_at[k];
            self.tp_ge[k] = tp;
            self.n_ge[k] = n;
        }
        let mut area = 0.0;
        let (mut nu, mut nd, mut pu, mut pd) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..d {
            let pos = self.pos_at[k];
            if pos > 0 {
                let (tp, n) = (self.tp_ge[k], self.n_ge[k]);
                let base = ratio(tp, n);
                let w = pos as f64;
                area += w * base;
                nu += w * (ratio(tp, n + 1) - base);
                nd += w * (ratio(tp, n - 1) - base);
                pu += w * (ratio(tp + 1, n + 1) - base);
                pd += w * (ratio(tp - 1, n - 1) - base);
            }
            self.neg_up[k + 1] = nu;
            self.neg_down[k + 1] = nd;
            self.pos_up[k + 1] = pu;
            self.pos_down[k + 1] = pd;
        }
        self.metric = area / self.n_pos;
    }

    /// Sum of `table` over slots in `(lo, hi]`.
    #[inline]
    fn span(table: &[f64], lo: usize, hi: usize) -> f64 {
        table[hi + 1] - table[lo + 1]
    }

    fn gain_numerator(&self, i: usize) -> f64 {
        let (c, a) = (self.from_slot[i], self.to_slot[i]);
        if c == a {
            return 0.0;
        }
        if self.labels[i] == 0 {
            if a > c {
                Self::span(&self.neg_up, c, a)
            } else {
                Self::span(&self.neg_down, a, c)
            }
        } else {
            let own_before = ratio(self.tp_ge[c], self.n_ge[c]);
            if a > c {
                let others = Self::span(&self.pos_up, c, a);
                let own_after = ratio(self.tp_ge[a] + 1, self.n_ge[a] + 1);
                others + own_after - own_before
            } else {
                let (tp, n) = (self.tp_ge[c], self.n_ge[c]);
                let self_term = ratio(tp - 1, n - 1) - ratio(tp, n);
                let others = Self::span(&self.pos_down, a, c) - self_term;
                let own_after = ratio(self.tp_ge[a], self.n_ge[a]);
                others + own_after - own_before
            }
        }
    }
}

impl GreedyEngine for AuprcEngine<'_> {
    fn metric(&self) -> f64 {
        self.metric
    }

    fn gain(&self, i: usize) -> f64 {
        self.gain_numerator(i) / self.n_pos
    }

    fn best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.labels.len() {
            if self.acquired[i] {
                continue;
            }
            let g = self.gain_numerator(i);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        best.map(|(i, _)| i)
    }

    fn apply(&mut self, j: usize) {
        debug_assert!(!self.acquired[j]);
        self.acquired[j] = true;
        let (c, a) = (self.from_slot[j], self.to_slot[j]);
        if c == a {
            return;
        }
        let y = self.labels[j] as i64;
        self.pos_at[c] -= y;
        self.all_at[c] -= 1;
        self.pos_at[a] += y;
        self.all_at[a] += 1;
        self.refresh();
    }
}
