//! Order-statistic index over cohort scores.
//!
//! Scores are compressed onto a fixed sorted domain at build time (every
//! value a sample may ever take must be supplied up front). One Fenwick tree
//! per class counts how many samples of that class currently sit at each
//! domain slot, giving O(log N) below/equal/above queries and O(log N)
//! single-sample moves.

use crate::error::{CamaError, Result};
use crate::metrics::{cmp_finite, LabeledScores};

#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Fenwick {
            tree: vec![0; len + 1],
        }
    }

    fn add(&mut self, pos: usize, delta: i64) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over slots `[0, end)`.
    fn prefix(&self, end: usize) -> i64 {
        let mut i = end;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }
}

/// Counts of one class relative to a query value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CmpCounts {
    pub below: u64,
    pub equal: u64,
    pub above: u64,
}

#[derive(Debug, Clone)]
pub struct ScoreIndex {
    domain: Vec<f64>,
    trees: [Fenwick; 2],
    totals: [u64; 2],
    labels: Vec<u8>,
    slots: Vec<usize>,
}

impl ScoreIndex {
    /// Builds the index with every sample at its score in `data`. The domain is
    /// the union of those scores and `extra_values`.
    pub fn build(data: &LabeledScores<'_>, extra_values: &[f64]) -> Result<Self> {
        if let Some(v) = extra_values.iter().find(|v| !v.is_finite()) {
            return Err(CamaError::Domain(format!("non-finite domain value {v}")));
        }
        let mut domain: Vec<f64> = data
            .scores()
            .iter()
            .chain(extra_values)
            .copied()
            .collect();
        domain.sort_unstable_by(|a, b| cmp_finite(*a, *b));
        domain.dedup_by(|a, b| a == b);

        let mut index = ScoreIndex {
            trees: [Fenwick::new(domain.len()), Fenwick::new(domain.len())],
            domain,
            totals: [0, 0],
            labels: data.labels().to_vec(),
            slots: Vec::with_capacity(data.len()),
        };
        for (&y, &s) in data.labels().iter().zip(data.scores()) {
            let slot = index.slot_of(s)?;
            index.trees[y as usize].add(slot, 1);
            index.totals[y as usize] += 1;
            index.slots.push(slot);
        }
        Ok(index)
    }

    /// Position of `v` in the compressed domain.
    pub fn slot_of(&self, v: f64) -> Result<usize> {
        if v.is_nan() {
            return Err(CamaError::Domain("NaN query value".into()));
        }
        self.domain
            .binary_search_by(|probe| cmp_finite(*probe, v))
            .map_err(|_| CamaError::Domain(format!("value {v} is not in the index domain")))
    }

    pub fn domain(&self) -> &[f64] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_total(&self, class: u8) -> u64 {
        self.totals[class as usize]
    }

    pub fn label(&self, sample_id: usize) -> Result<u8> {
        self.labels
            .get(sample_id)
            .copied()
            .ok_or(CamaError::NotFound(sample_id))
    }

    /// Current score of a sample.
    pub fn score(&self, sample_id: usize) -> Result<f64> {
        self.slots
            .get(sample_id)
            .map(|&slot| self.domain[slot])
            .ok_or(CamaError::NotFound(sample_id))
    }

    /// Samples of `class` whose current score is below, equal to and above `v`.
    pub fn count_cmp(&self, class: u8, v: f64) -> Result<CmpCounts> {
        let slot = self.slot_of(v)?;
        Ok(self.count_cmp_slot(class, slot))
    }

    pub(crate) fn count_cmp_slot(&self, class: u8, slot: usize) -> CmpCounts {
        let tree = &self.trees[class as usize];
        let below = tree.prefix(slot) as u64;
        let through = tree.prefix(slot + 1) as u64;
        CmpCounts {
            below,
            equal: through - below,
            above: self.totals[class as usize] - through,
        }
    }

    /// Moves a sample to `new_score`.
    pub fn reassign(&mut self, sample_id: usize, new_score: f64) -> Result<()> {
        let old = *self
            .slots
            .get(sample_id)
            .ok_or(CamaError::NotFound(sample_id))?;
        let new = self.slot_of(new_score)?;
        if old != new {
            let tree = &mut self.trees[self.labels[sample_id] as usize];
            tree.add(old, -1);
            tree.add(new, 1);
            self.slots[sample_id] = new;
        }
        Ok(())
    }

    /// `sum over positives of 2 * (negatives below) + (negatives equal)`.
    pub fn auroc_pair_count2(&self) -> u64 {
        self.slots
            .iter()
            .zip(&self.labels)
            .filter(|(_, &y)| y == 1)
            .map(|(&slot, _)| {
                let c = self.count_cmp_slot(0, slot);
                2 * c.below + c.equal
            })
            .sum()
    }
}
