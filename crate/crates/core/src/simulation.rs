//! Budget sweeps, the normalized area of gain and run aggregation.

use std::fmt;
use std::str::FromStr;

use crate::cohort::Cohort;
use crate::error::{CamaError, Result};
use crate::gains::{greedy_oracle_select_with_mode, AcquisitionPlan, OracleMode};
use crate::metrics::{LabeledScores, Metric};
use crate::strategies::{priority_scores, select_top, Strategy};

/// Gaps `|M_post - M_pre|` at or below this are treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Grid size used when none is configured: 0%, 5%, ..., 100%.
pub const DEFAULT_GRID_POINTS: usize = 21;

/// How a budget fraction becomes a sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Nearest integer, halves away from zero.
    #[default]
    Nearest,
    Floor,
    Ceil,
}

impl Rounding {
    pub fn as_str(self) -> &'static str {
        match self {
            Rounding::Nearest => "round",
            Rounding::Floor => "floor",
            Rounding::Ceil => "ceil",
        }
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Rounding {
    type Err = CamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round" => Ok(Rounding::Nearest),
            "floor" => Ok(Rounding::Floor),
            "ceil" => Ok(Rounding::Ceil),
            _ => Err(CamaError::Config(format!(
                "unknown rounding rule '{s}' (expected round, floor or ceil)"
            ))),
        }
    }
}

/// Budget fractions: strictly increasing, starting at 0 and ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetGrid {
    fractions: Vec<f64>,
}

impl BudgetGrid {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() < 2 || fractions[0] != 0.0 || *fractions.last().unwrap() != 1.0 {
            return Err(CamaError::Config(
                "budget grid must start at 0 and end at 1".into(),
            ));
        }
        if fractions
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(CamaError::Config(
                "budget grid must be strictly increasing".into(),
            ));
        }
        Ok(BudgetGrid { fractions })
    }

    /// `points` equispaced fractions from 0 to 1.
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(CamaError::Config(format!(
                "budget grid needs at least 2 points, got {points}"
            )));
        }
        let last = (points - 1) as f64;
        BudgetGrid::new((0..points).map(|i| i as f64 / last).collect())
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// Acquired sample count at each grid point for a cohort of `n`. The
    /// endpoints are always 0 and `n`.
    pub fn counts(&self, n: usize, rounding: Rounding) -> Vec<usize> {
        let last = self.fractions.len() - 1;
        self.fractions
            .iter()
            .enumerate()
            .map(|(i, &b)| match i {
                0 => 0,
                i if i == last => n,
                _ => acquired_count(b, n, rounding),
            })
            .collect()
    }
}

impl Default for BudgetGrid {
    fn default() -> Self {
        BudgetGrid::uniform(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

pub fn acquired_count(fraction: f64, n: usize, rounding: Rounding) -> usize {
    let raw = fraction * n as f64;
    let count = match rounding {
        Rounding::Nearest => raw.round(),
        Rounding::Floor => raw.floor(),
        Rounding::Ceil => raw.ceil(),
    };
    (count.max(0.0) as usize).min(n)
}

/// Metric value across budget fractions for one strategy on one cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceCurve {
    pub strategy: Strategy,
    pub metric: Metric,
    pub grid: BudgetGrid,
    pub values: Vec<f64>,
    pub m_pre: f64,
    pub m_post: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub seed: u64,
    pub rounding: Rounding,
    pub oracle_mode: OracleMode,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            seed: 0,
            rounding: Rounding::Nearest,
            oracle_mode: OracleMode::Evolving,
        }
    }
}

/// The order in which a strategy acquires the whole cohort.
#[derive(Debug, Clone, PartialEq)]
pub enum AcquisitionOrder {
    /// Descending priority from a score-once strategy.
    Ranked(Vec<usize>),
    /// A full-budget greedy oracle pass.
    Greedy(AcquisitionPlan),
}

impl AcquisitionOrder {
    pub fn positions(&self) -> Vec<usize> {
        match self {
            AcquisitionOrder::Ranked(order) => order.clone(),
            AcquisitionOrder::Greedy(plan) => plan.order(),
        }
    }
}

pub fn acquisition_order(
    cohort: &Cohort,
    strategy: Strategy,
    options: &SweepOptions,
) -> Result<AcquisitionOrder> {
    match strategy.oracle_metric() {
        Some(metric) => Ok(AcquisitionOrder::Greedy(greedy_oracle_select_with_mode(
            cohort,
            metric,
            cohort.len(),
            options.oracle_mode,
        )?)),
        None => {
            let scores = priority_scores(cohort, strategy, options.seed)?;
            Ok(AcquisitionOrder::Ranked(select_top(&scores, cohort.len())?))
        }
    }
}

/// Sweeps the budget grid for one strategy and metric.
pub fn sweep(
    cohort: &Cohort,
    strategy: Strategy,
    metric: Metric,
    grid: &BudgetGrid,
    options: &SweepOptions,
) -> Result<PerformanceCurve> {
    let order = acquisition_order(cohort, strategy, options)?;
    curve_from_order(cohort, strategy, &order, metric, grid, options.rounding)
}

/// Builds the curve for `metric` from a precomputed acquisition order. A
/// greedy plan for the same metric is read off directly; anything else is
/// evaluated on the substituted score vector at each grid point.
pub fn curve_from_order(
    cohort: &Cohort,
    strategy: Strategy,
    order: &AcquisitionOrder,
    metric: Metric,
    grid: &BudgetGrid,
    rounding: Rounding,
) -> Result<PerformanceCurve> {
    let m_pre = metric.evaluate(&cohort.pre_acquisition())?;
    let m_post = metric.evaluate(&cohort.post_acquisition())?;
    let counts = grid.counts(cohort.len(), rounding);

    let values = match order {
        AcquisitionOrder::Greedy(plan) if plan.metric == metric => {
            counts.iter().map(|&c| plan.metric_after(c)).collect()
        }
        _ => {
            let positions = order.positions();
            let mut scores = cohort.s_avail().to_vec();
            let mut applied = 0;
            let mut values = Vec::with_capacity(counts.len());
            for &c in &counts {
                // grid counts are non-decreasing, so prefixes only grow
                for &i in &positions[applied..c] {
                    scores[i] = cohort.s_acquired()[i];
                }
                applied = c;
                values.push(metric.evaluate(&LabeledScores::new(cohort.labels(), &scores)?)?);
            }
            values
        }
    };
    Ok(PerformanceCurve {
        strategy,
        metric,
        grid: grid.clone(),
        values,
        m_pre,
        m_post,
    })
}

/// Normalized area of gain: the trapezoidal integral of `M(b) - M_pre` over
/// the grid divided by `M_post - M_pre`.
pub fn g_full(curve: &PerformanceCurve) -> Result<f64> {
    let gap = curve.m_post - curve.m_pre;
    if gap.abs() <= DEGENERACY_THRESHOLD {
        return Err(CamaError::Degenerate { gap: gap.abs() });
    }
    let b = curve.grid.fractions();
    let v = &curve.values;
    if v.len() != b.len() {
        return Err(CamaError::Precondition(format!(
            "curve has {} values for {} grid points",
            v.len(),
            b.len()
        )));
    }
    let area: f64 = (1..b.len())
        .map(|k| (b[k] - b[k - 1]) * ((v[k] - curve.m_pre) + (v[k - 1] - curve.m_pre)) / 2.0)
        .sum();
    Ok(area / gap)
}

/// Pre/post metric anchors of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskAnchors {
    pub task: String,
    pub m_pre: f64,
    pub m_post: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    NegativeGain,
    Degenerate,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::NegativeGain => "negative gain (m_post < m_pre)",
            DropReason::Degenerate => "degenerate (|m_post - m_pre| <= 1e-9)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedTask {
    pub task: String,
    pub m_pre: f64,
    pub m_post: f64,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    pub retained: Vec<String>,
    pub dropped: Vec<DroppedTask>,
}

/// Drops tasks whose acquisition lowers the metric and tasks with no gap to
/// normalize by. With `drop_negative` off only degenerate tasks are dropped.
pub fn filter_tasks(tasks: &[TaskAnchors], drop_negative: bool) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for t in tasks {
        let reason = if (t.m_post - t.m_pre).abs() <= DEGENERACY_THRESHOLD {
            Some(DropReason::Degenerate)
        } else if drop_negative && t.m_post < t.m_pre {
            Some(DropReason::NegativeGain)
        } else {
            None
        };
        match reason {
            Some(reason) => out.dropped.push(DroppedTask {
                task: t.task.clone(),
                m_pre: t.m_pre,
                m_post: t.m_post,
                reason,
            }),
            None => out.retained.push(t.task.clone()),
        }
    }
    out
}

pub fn filter_negative_gain(tasks: &[TaskAnchors]) -> FilterOutcome {
    filter_tasks(tasks, true)
}

/// Mean and standard error of the mean (n - 1 denominator; 0 for one run).
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(CamaError::Precondition("no runs to aggregate".into()));
    }
    // Welford updates keep identical runs exactly at zero spread
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = mean.clamp(lo, hi);
    let n = values.len() as f64;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = (m2 / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
