//! Scalar classification metrics and Bernoulli information measures.
//!
//! AUROC is computed from exact integer pair counts (wins count twice, ties
//! once) so only the final normalization touches floating point. AUPRC is
//! the step sum over unique thresholds, without interpolation. Entropy and
//! KL divergence are in bits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{CamaError, Result};

/// Lower/upper clamp applied to the second argument of [`bernoulli_kl`].
pub const KL_EPSILON: f64 = 1e-12;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(CamaError::Domain(format!(
                "probability {value} is outside [0, 1]"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Logistic function `1 / (1 + exp(-s))`.
pub fn sigmoid(s: f64) -> Result<Probability> {
    if !s.is_finite() {
        return Err(CamaError::Domain(format!("sigmoid of non-finite logit {s}")));
    }
    Ok(Probability(sigmoid_unchecked(s)))
}

#[inline]
pub(crate) fn sigmoid_unchecked(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// Borrowed view of a labelled score vector.
///
/// Construction validates that lengths agree, the cohort is non-empty, every
/// label is 0 or 1 and every score is finite.
#[derive(Debug, Clone, Copy)]
pub struct LabeledScores<'a> {
    labels: &'a [u8],
    scores: &'a [f64],
    n_pos: usize,
}

impl<'a> LabeledScores<'a> {
    pub fn new(labels: &'a [u8], scores: &'a [f64]) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(CamaError::Precondition(format!(
                "{} labels but {} scores",
                labels.len(),
                scores.len()
            )));
        }
        if labels.is_empty() {
            return Err(CamaError::Precondition("empty cohort".into()));
        }
        let mut n_pos = 0;
        for (i, (&y, &s)) in labels.iter().zip(scores).enumerate() {
            match y {
                0 => {}
                1 => n_pos += 1,
                other => {
                    return Err(CamaError::Domain(format!(
                        "label {other} at position {i} is not 0 or 1"
                    )))
                }
            }
            if !s.is_finite() {
                return Err(CamaError::Domain(format!(
                    "score {s} at position {i} is not finite"
                )));
            }
        }
        Ok(LabeledScores {
            labels,
            scores,
            n_pos,
        })
    }

    pub fn labels(&self) -> &'a [u8] {
        self.labels
    }

    pub fn scores(&self) -> &'a [f64] {
        self.scores
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.n_pos
    }

    pub fn n_negative(&self) -> usize {
        self.labels.len() - self.n_pos
    }
}

/// Whether the values handed to [`auprc`] are logits or already probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreScale {
    Logit,
    Probability,
}

/// The cohort-level metrics an acquisition can be judged by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Auroc,
    Auprc,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Auroc, Metric::Auprc];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Auroc => "auroc",
            Metric::Auprc => "auprc",
        }
    }

    /// Evaluates the metric on logit scores.
    pub fn evaluate(self, data: &LabeledScores<'_>) -> Result<f64> {
        match self {
            Metric::Auroc => auroc(data),
            Metric::Auprc => auprc(data, ScoreScale::Logit),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = CamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auroc" => Ok(Metric::Auroc),
            "auprc" => Ok(Metric::Auprc),
            _ => Err(CamaError::Config(format!(
                "unknown metric '{s}' (expected auroc or auprc)"
            ))),
        }
    }
}

pub(crate) fn require_both_classes(n_pos: usize, n_neg: usize) -> Result<()> {
    if n_pos == 0 || n_neg == 0 {
        return Err(CamaError::UndefinedMetric(format!(
            "AUROC needs both classes, got {n_pos} positive and {n_neg} negative samples"
        )));
    }
    Ok(())
}

/// Twice the number of (positive, negative) pairs won by the positive, with
/// ties counted once: `sum 2*I(s_i > s_j) + I(s_i == s_j)`.
pub(crate) fn auroc_pair_count2(labels: &[u8], scores: &[f64]) -> u64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| cmp_finite(scores[a], scores[b]));

    let mut neg_below: u64 = 0;
    let mut acc: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let value = scores[order[start]];
        let mut end = start;
        let (mut pos_here, mut neg_here) = (0u64, 0u64);
        while end < order.len() && scores[order[end]] == value {
            if labels[order[end]] == 1 {
                pos_here += 1;
            } else {
                neg_here += 1;
            }
            end += 1;
        }
        acc += pos_here * (2 * neg_below + neg_here);
        neg_below += neg_here;
        start = end;
    }
    acc
}

/// Area under the ROC curve with half credit for tied scores.
pub fn auroc(data: &LabeledScores<'_>) -> Result<f64> {
    let (n_pos, n_neg) = (data.n_positive(), data.n_negative());
    require_both_classes(n_pos, n_neg)?;
    let count2 = auroc_pair_count2(data.labels, data.scores);
    Ok(count2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Area under the precision-recall curve as the step sum
/// `sum_k (R_k - R_{k-1}) P_k` over unique thresholds taken in descending order.
pub fn auprc(data: &LabeledScores<'_>, scale: ScoreScale) -> Result<f64> {
    if data.n_positive() == 0 {
        return Err(CamaError::UndefinedMetric(
            "AUPRC needs at least one positive sample".into(),
        ));
    }
    let probs: Vec<f64> = match scale {
        ScoreScale::Logit => data.scores.iter().map(|&s| sigmoid_unchecked(s)).collect(),
        ScoreScale::Probability => {
            if let Some(&p) = data.scores.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(CamaError::Domain(format!(
                    "probability {p} is outside [0, 1]"
                )));
            }
            data.scores.to_vec()
        }
    };
    Ok(auprc_step_sum(data.labels, &probs, data.n_positive()))
}

pub(crate) fn auprc_step_sum(labels: &[u8], probs: &[f64], n_pos: usize) -> f64 {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_unstable_by(|&a, &b| cmp_finite(probs[b], probs[a]));

    let n_pos = n_pos as f64;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut recall_prev = 0.0;
    let mut area = 0.0;
    let mut start = 0;
    while start < order.len() {
        let threshold = probs[order[start]];
        let mut end = start;
        while end < order.len() && probs[order[end]] == threshold {
            if labels[order[end]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        let recall = tp as f64 / n_pos;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - recall_prev) * precision;
        recall_prev = recall;
        start = end;
    }
    area
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: Probability) -> f64 {
    entropy_bits(p.0)
}

/// [`binary_entropy`] for a raw value, validating the range.
pub fn binary_entropy_of(p: f64) -> Result<f64> {
    Probability::new(p).map(binary_entropy)
}

#[inline]
pub(crate) fn entropy_bits(p: f64) -> f64 {
    xlog2x(p) + xlog2x(1.0 - p)
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// `KL(Bern(p) || Bern(q))` in bits. `q` is clamped to `[KL_EPSILON, 1 - KL_EPSILON]`.
pub fn bernoulli_kl(p: Probability, q: Probability) -> f64 {
    kl_bits(p.0, q.0)
}

/// [`bernoulli_kl`] for raw values, validating both ranges.
pub fn bernoulli_kl_of(p: f64, q: f64) -> Result<f64> {
    Ok(bernoulli_kl(Probability::new(p)?, Probability::new(q)?))
}

#[inline]
pub(crate) fn kl_bits(p: f64, q: f64) -> f64 {
    let q = q.clamp(KL_EPSILON, 1.0 - KL_EPSILON);
    let term = |a: f64, b: f64| if a <= 0.0 { 0.0 } else { a * (a / b).log2() };
    let kl = term(p, q) + term(1.0 - p, 1.0 - q);
    // rounding can leave a tiny negative residue when p == q
    kl.max(0.0)
}

#[inline]
pub(crate) fn cmp_finite(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("scores are finite")
}
