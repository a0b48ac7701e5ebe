//! Acquisition strategies.
//!
//! Every non-oracle strategy maps the cohort to one priority per sample and
//! acquisition takes the top of that ranking. The information each family
//! may read is fixed: `True*` strategies read `s_avail` and `s_acquired`,
//! `Expected*` read `s_avail` and the imputations, `Baseline*` read only
//! `s_avail`, and `Random` reads nothing. No strategy but the oracles reads
//! labels.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cohort::{Cohort, ScoreRecord};
use crate::error::{CamaError, Result};
use crate::metrics::{cmp_finite, entropy_bits, kl_bits, sigmoid_unchecked, Metric};

/// Generator behind [`score_random`], recorded in run configurations.
pub const RANDOM_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    TrueKl,
    TrueRankChange,
    TrueUncertaintyReduction,
    ExpectedKl,
    ExpectedProbability,
    ExpectedUncertaintyReduction,
    ExpectedRankChange,
    BaselineUncertainty,
    BaselineProbability,
    Random,
    OracleAuroc,
    OracleAuprc,
}

impl Strategy {
    pub const ALL: [Strategy; 12] = [
        Strategy::TrueKl,
        Strategy::TrueRankChange,
        Strategy::TrueUncertaintyReduction,
        Strategy::ExpectedKl,
        Strategy::ExpectedProbability,
        Strategy::ExpectedUncertaintyReduction,
        Strategy::ExpectedRankChange,
        Strategy::BaselineUncertainty,
        Strategy::BaselineProbability,
        Strategy::Random,
        Strategy::OracleAuroc,
        Strategy::OracleAuprc,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::TrueKl => "true_kl",
            Strategy::TrueRankChange => "true_rank",
            Strategy::TrueUncertaintyReduction => "true_uncert",
            Strategy::ExpectedKl => "exp_kl",
            Strategy::ExpectedProbability => "exp_prob",
            Strategy::ExpectedUncertaintyReduction => "exp_uncert",
            Strategy::ExpectedRankChange => "exp_rank",
            Strategy::BaselineUncertainty => "base_uncert",
            Strategy::BaselineProbability => "base_prob",
            Strategy::Random => "random",
            Strategy::OracleAuroc => "oracle_auroc",
            Strategy::OracleAuprc => "oracle_auprc",
        }
    }

    /// The metric a greedy oracle optimizes, if this is an oracle.
    pub fn oracle_metric(self) -> Option<Metric> {
        match self {
            Strategy::OracleAuroc => Some(Metric::Auroc),
            Strategy::OracleAuprc => Some(Metric::Auprc),
            _ => None,
        }
    }

    pub fn is_oracle(self) -> bool {
        self.oracle_metric().is_some()
    }

    pub fn needs_imputations(self) -> bool {
        matches!(
            self,
            Strategy::ExpectedKl
                | Strategy::ExpectedProbability
                | Strategy::ExpectedUncertaintyReduction
                | Strategy::ExpectedRankChange
        )
    }

    /// Whether the ranking depends on the run seed.
    pub fn is_seeded(self) -> bool {
        self == Strategy::Random
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.id())
    }
}

impl FromStr for Strategy {
    type Err = CamaError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| CamaError::Config(format!("unknown strategy '{s}'")))
    }
}

fn require_imputations(record: &ScoreRecord) -> Result<()> {
    if record.s_imp.is_empty() {
        Err(CamaError::Precondition(format!(
            "sample {} has no imputed scores",
            record.id
        )))
    } else {
        Ok(())
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let k = values.len() as f64;
    values.sum::<f64>() / k
}

/// `KL(Bern(p_avail) || Bern(p_acquired))` in bits.
pub fn score_true_kl(record: &ScoreRecord) -> f64 {
    kl_bits(sigmoid_unchecked(record.s_avail), sigmoid_unchecked(record.s_acquired))
}

/// `H(p_avail) - H(p_acquired)`; negative when acquisition adds uncertainty.
pub fn score_true_uncertainty_reduction(record: &ScoreRecord) -> f64 {
    entropy_bits(sigmoid_unchecked(record.s_avail))
        - entropy_bits(sigmoid_unchecked(record.s_acquired))
}

/// Mean imputed probability of the positive class.
pub fn score_expected_probability(record: &ScoreRecord) -> Result<f64> {
    require_imputations(record)?;
    Ok(mean(record.s_imp.iter().map(|&s| sigmoid_unchecked(s))))
}

/// `H(p_avail)` minus the mean entropy of the imputed probabilities.
pub fn score_expected_uncertainty_reduction(record: &ScoreRecord) -> Result<f64> {
    require_imputations(record)?;
    let h_imp = mean(record.s_imp.iter().map(|&s| entropy_bits(sigmoid_unchecked(s))));
    Ok(entropy_bits(sigmoid_unchecked(record.s_avail)) - h_imp)
}

/// Mean of `KL(Bern(p_avail) || Bern(p_imp_k))` over the imputations.
pub fn score_expected_kl(record: &ScoreRecord) -> Result<f64> {
    require_imputations(record)?;
    let p = sigmoid_unchecked(record.s_avail);
    Ok(mean(record.s_imp.iter().map(|&s| kl_bits(p, sigmoid_unchecked(s)))))
}

pub fn score_baseline_uncertainty(record: &ScoreRecord) -> f64 {
    entropy_bits(sigmoid_unchecked(record.s_avail))
}

pub fn score_baseline_probability(record: &ScoreRecord) -> f64 {
    sigmoid_unchecked(record.s_avail)
}

/// Ranks of hypothetical probabilities against the other samples'
/// pre-acquisition probabilities. `R(p) = 1 + #{j != i : p_avail_j < p}`.
struct RankReference {
    sorted: Vec<f64>,
    avail: Vec<f64>,
}

impl RankReference {
    fn new(s_avail: &[f64]) -> Self {
        let avail: Vec<f64> = s_avail.iter().map(|&s| sigmoid_unchecked(s)).collect();
        let mut sorted = avail.clone();
        sorted.sort_unstable_by(|a, b| cmp_finite(*a, *b));
        RankReference { sorted, avail }
    }

    /// Rank of sample `i` if its probability were `p`.
    fn rank(&self, i: usize, p: f64) -> usize {
        let below = self.sorted.partition_point(|&q| q < p);
        let own = usize::from(self.avail[i] < p);
        1 + below - own
    }

    fn abs_change(&self, i: usize, target_logit: f64) -> f64 {
        let before = self.rank(i, self.avail[i]);
        let after = self.rank(i, sigmoid_unchecked(target_logit));
        before.abs_diff(after) as f64
    }
}

fn require_pair(n: usize) -> Result<()> {
    if n < 2 {
        return Err(CamaError::Precondition(format!(
            "rank change needs at least 2 samples, got {n}"
        )));
    }
    Ok(())
}

/// `|R(p_acquired) - R(p_avail)|` per sample, each sample moved on its own.
pub fn score_true_rank_change(cohort: &Cohort) -> Result<Vec<f64>> {
    true_rank_change(cohort.s_avail(), cohort.s_acquired())
}

/// Slice form of [`score_true_rank_change`].
pub fn true_rank_change(s_avail: &[f64], s_acquired: &[f64]) -> Result<Vec<f64>> {
    require_pair(s_avail.len())?;
    let reference = RankReference::new(s_avail);
    Ok(s_acquired
        .iter()
        .enumerate()
        .map(|(i, &s)| reference.abs_change(i, s))
        .collect())
}

/// Mean over imputations of `|R(p_imp_k) - R(p_avail)|`.
pub fn score_expected_rank_change(cohort: &Cohort) -> Result<Vec<f64>> {
    let imputations: Vec<&[f64]> = cohort.records().iter().map(|r| r.s_imp.as_slice()).collect();
    expected_rank_change(cohort.s_avail(), &imputations)
}

/// Slice form of [`score_expected_rank_change`].
pub fn expected_rank_change(s_avail: &[f64], s_imp: &[&[f64]]) -> Result<Vec<f64>> {
    require_pair(s_avail.len())?;
    if let Some(i) = s_imp.iter().position(|imp| imp.is_empty()) {
        return Err(CamaError::Precondition(format!(
            "sample at position {i} has no imputed scores"
        )));
    }
    let reference = RankReference::new(s_avail);
    Ok(s_imp
        .iter()
        .enumerate()
        .map(|(i, imp)| mean(imp.iter().map(|&s| reference.abs_change(i, s))))
        .collect())
}

/// `n` uniform draws in `[0, 1)` from a ChaCha8 stream keyed by `seed`.
pub fn score_random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Priority score of every sample under a non-oracle strategy.
pub fn priority_scores(cohort: &Cohort, strategy: Strategy, seed: u64) -> Result<Vec<f64>> {
    if strategy.needs_imputations() && cohort.k() == 0 {
        return Err(CamaError::Config(format!(
            "strategy {strategy} needs imputed scores but the cohort has none"
        )));
    }
    let per_record = |f: fn(&ScoreRecord) -> f64| cohort.records().iter().map(f).collect();
    let per_record_checked = |f: fn(&ScoreRecord) -> Result<f64>| cohort.records().iter().map(f).collect();
    match strategy {
        Strategy::TrueKl => Ok(per_record(score_true_kl)),
        Strategy::TrueUncertaintyReduction => Ok(per_record(score_true_uncertainty_reduction)),
        Strategy::TrueRankChange => score_true_rank_change(cohort),
        Strategy::ExpectedKl => per_record_checked(score_expected_kl),
        Strategy::ExpectedProbability => per_record_checked(score_expected_probability),
        Strategy::ExpectedUncertaintyReduction => {
            per_record_checked(score_expected_uncertainty_reduction)
        }
        Strategy::ExpectedRankChange => score_expected_rank_change(cohort),
        Strategy::BaselineUncertainty => Ok(per_record(score_baseline_uncertainty)),
        Strategy::BaselineProbability => Ok(per_record(score_baseline_probability)),
        Strategy::Random => Ok(score_random(cohort.len(), seed)),
        Strategy::OracleAuroc | Strategy::OracleAuprc => Err(CamaError::Config(format!(
            "{strategy} selects greedily and has no per-sample priority"
        ))),
    }
}

/// The `budget` highest-scoring positions, best first, lowest position on ties.
pub fn select_top(scores: &[f64], budget: usize) -> Result<Vec<usize>> {
    if budget > scores.len() {
        return Err(CamaError::Precondition(format!(
            "budget {budget} exceeds cohort size {}",
            scores.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(CamaError::Domain(format!("priority at position {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let by_priority = |&a: &usize, &b: &usize| match scores[b].partial_cmp(&scores[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    };
    if budget < scores.len() {
        order.select_nth_unstable_by(budget, by_priority);
        order.truncate(budget);
    }
    order.sort_unstable_by(by_priority);
    Ok(order)
}
