//! Greedy AUROC oracle engine.
//!
//! Every unacquired sample carries its exact marginal gain as an integer in
//! half-pair units (`2 * wins + ties` against the opposite class). Initial
//! gains come from the rank index; after each acquisition only samples of
//! the opposite class can change, and each such change is an O(1) update,
//! so one greedy step costs O(N) with no floating-point drift.

use super::GreedyEngine;
use crate::cohort::Cohort;
use crate::error::Result;
use crate::metrics::require_both_classes;
use crate::rank_index::ScoreIndex;

#[inline]
fn beats(v: f64, x: f64) -> i64 {
    if v > x {
        2
    } else if v == x {
        1
    } else {
        0
    }
}

pub(crate) struct AurocEngine<'c> {
    labels: &'c [u8],
    avail: &'c [f64],
    acquired_score: &'c [f64],
    current: Vec<f64>,
    acquired: Vec<bool>,
    gain2: Vec<i64>,
    total2: i64,
    norm2: f64,
}

impl<'c> AurocEngine<'c> {
    pub(crate) fn new(cohort: &'c Cohort) -> Result<Self> {
        require_both_classes(cohort.n_positive(), cohort.n_negative())?;
        let index = ScoreIndex::build(&cohort.pre_acquisition(), cohort.s_acquired())?;
        let gain2 = (0..cohort.len())
            .map(|i| {
                let (y, from, to) = (cohort.labels()[i], cohort.s_avail()[i], cohort.s_acquired()[i]);
                half_pair_gain(&index, y, from, to)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AurocEngine {
            labels: cohort.labels(),
            avail: cohort.s_avail(),
            acquired_score: cohort.s_acquired(),
            current: cohort.s_avail().to_vec(),
            acquired: vec![false; cohort.len()],
            gain2,
            total2: index.auroc_pair_count2() as i64,
            norm2: 2.0 * cohort.n_positive() as f64 * cohort.n_negative() as f64,
        })
    }
}

/// Change in `2 * wins + ties` when a sample of class `label` moves from
/// `from` to `to`, all other samples held at their indexed scores.
pub(crate) fn half_pair_gain(index: &ScoreIndex, label: u8, from: f64, to: f64) -> Result<i64> {
    if from == to {
        return Ok(0);
    }
    let (before, after) = if label == 1 {
        let b = index.count_cmp(0, from)?;
        let a = index.count_cmp(0, to)?;
        (2 * b.below + b.equal, 2 * a.below + a.equal)
    } else {
        let b = index.count_cmp(1, from)?;
        let a = index.count_cmp(1, to)?;
        (2 * b.above + b.equal, 2 * a.above + a.equal)
    };
    Ok(after as i64 - before as i64)
}

impl GreedyEngine for AurocEngine<'_> {
    fn metric(&self) -> f64 {
        self.total2 as f64 / self.norm2
    }

    fn gain(&self, i: usize) -> f64 {
        self.gain2[i] as f64 / self.norm2
    }

    fn best(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.gain2.len() {
            if self.acquired[i] {
                continue;
            }
            if best.is_none_or(|b| self.gain2[i] > self.gain2[b]) {
                best = Some(i);
            }
        }
        best
    }

    fn apply(&mut self, j: usize) {
        debug_assert!(!self.acquired[j]);
        self.acquired[j] = true;
        self.total2 += self.gain2[j];
        let old = self.current[j];
        let new = self.acquired_score[j];
        self.current[j] = new;
        if old == new {
            return;
        }
        let moved_label = self.labels[j];
        for i in 0..self.labels.len() {
            if self.acquired[i] || self.labels[i] == moved_label {
                continue;
            }
            let (from, to) = (self.avail[i], self.acquired_score[i]);
            let delta = if moved_label == 0 {
                // positive i against a negative at x: beats(v, x)
                (beats(to, new) - beats(from, new)) - (beats(to, old) - beats(from, old))
            } else {
                // negative i against a positive at x: beats(x, v)
                (beats(new, to) - beats(new, from)) - (beats(old, to) - beats(old, from))
            };
            self.gain2[i] += delta;
        }
    }
}
