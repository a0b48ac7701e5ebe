//! Exact marginal metric gains and the greedy oracle.
//!
//! [`auroc_marginal_gain`] and [`auprc_marginal_gain`] answer single queries
//! against a [`CohortState`]. [`greedy_oracle_select`] runs whole budgets
//! through dedicated engines that keep every candidate's gain current as the
//! state evolves.

mod auprc;
mod auroc;

use std::fmt;
use std::str::FromStr;

use crate::cohort::Cohort;
use crate::error::{CamaError, Result};
use crate::metrics::{auprc_step_sum, require_both_classes, sigmoid_unchecked, Metric};
use crate::rank_index::ScoreIndex;

/// Which cohort state oracle gains are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Gains are recomputed against the current state after every acquisition.
    #[default]
    Evolving,
    /// Gains are computed once against the pre-acquisition cohort and samples
    /// are taken in that order.
    Frozen,
}

impl OracleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleMode::Evolving => "evolving",
            OracleMode::Frozen => "frozen",
        }
    }
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for OracleMode {
    type Err = CamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evolving" => Ok(OracleMode::Evolving),
            "frozen" => Ok(OracleMode::Frozen),
            _ => Err(CamaError::Config(format!(
                "unknown oracle mode '{s}' (expected evolving or frozen)"
            ))),
        }
    }
}

/// A cohort part-way through acquisition: samples in the acquired set sit at
/// `s_acquired`, all others at `s_avail`.
#[derive(Debug, Clone)]
pub struct CohortState<'c> {
    cohort: &'c Cohort,
    current: Vec<f64>,
    acquired: Vec<bool>,
    selected: Vec<usize>,
    budget: usize,
    index: ScoreIndex,
}

impl<'c> CohortState<'c> {
    pub fn new(cohort: &'c Cohort, budget: usize) -> Result<Self> {
        if budget > cohort.len() {
            return Err(CamaError::Precondition(format!(
                "budget {budget} exceeds cohort size {}",
                cohort.len()
            )));
        }
        Ok(CohortState {
            cohort,
            current: cohort.s_avail().to_vec(),
            acquired: vec![false; cohort.len()],
            selected: Vec::with_capacity(budget),
            budget,
            index: ScoreIndex::build(&cohort.pre_acquisition(), cohort.s_acquired())?,
        })
    }

    pub fn cohort(&self) -> &'c Cohort {
        self.cohort
    }

    pub fn current_scores(&self) -> &[f64] {
        &self.current
    }

    pub fn is_acquired(&self, i: usize) -> bool {
        self.acquired.get(i).copied().unwrap_or(false)
    }

    /// Acquired positions in acquisition order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    fn check_candidate(&self, i: usize) -> Result<()> {
        if i >= self.current.len() {
            return Err(CamaError::NotFound(i));
        }
        if self.acquired[i] {
            return Err(CamaError::Precondition(format!(
                "sample {i} is already acquired"
            )));
        }
        Ok(())
    }

    /// Moves sample `i` to its acquired score.
    pub fn acquire(&mut self, i: usize) -> Result<()> {
        self.check_candidate(i)?;
        if self.selected.len() == self.budget {
            return Err(CamaError::Precondition(format!(
                "budget of {} acquisitions is exhausted",
                self.budget
            )));
        }
        let to = self.cohort.s_acquired()[i];
        self.index.reassign(i, to)?;
        self.current[i] = to;
        self.acquired[i] = true;
        self.selected.push(i);
        Ok(())
    }

    /// Metric of the current state, recomputed from scratch.
    pub fn metric(&self, metric: Metric) -> Result<f64> {
        let labels = self.cohort.labels();
        match metric {
            Metric::Auroc => {
                require_both_classes(self.cohort.n_positive(), self.cohort.n_negative())?;
                let norm2 = 2.0 * self.cohort.n_positive() as f64 * self.cohort.n_negative() as f64;
                Ok(self.index.auroc_pair_count2() as f64 / norm2)
            }
            Metric::Auprc => {
                let data = crate::metrics::LabeledScores::new(labels, &self.current)?;
                crate::metrics::auprc(&data, crate::metrics::ScoreScale::Logit)
            }
        }
    }
}

/// Exact AUROC change if sample `i` moved to `s_acquired`, all others held at
/// their current scores. O(log N) through the rank index.
pub fn auroc_marginal_gain(state: &CohortState<'_>, i: usize) -> Result<f64> {
    let cohort = state.cohort;
    require_both_classes(cohort.n_positive(), cohort.n_negative())?;
    state.check_candidate(i)?;
    let g2 = auroc::half_pair_gain(
        &state.index,
        cohort.labels()[i],
        state.current[i],
        cohort.s_acquired()[i],
    )?;
    Ok(g2 as f64 / (2.0 * cohort.n_positive() as f64 * cohort.n_negative() as f64))
}

/// AUPRC change if sample `i` moved to `s_acquired`, by recomputing the step
/// sum before and after the swap.
pub fn auprc_marginal_gain(state: &CohortState<'_>, i: usize) -> Result<f64> {
    let cohort = state.cohort;
    if cohort.n_positive() == 0 {
        return Err(CamaError::UndefinedMetric(
            "AUPRC needs at least one positive sample".into(),
        ));
    }
    state.check_candidate(i)?;
    let mut probs: Vec<f64> = state.current.iter().map(|&s| sigmoid_unchecked(s)).collect();
    let before = auprc_step_sum(cohort.labels(), &probs, cohort.n_positive());
    probs[i] = sigmoid_unchecked(cohort.s_acquired()[i]);
    let after = auprc_step_sum(cohort.labels(), &probs, cohort.n_positive());
    Ok(after - before)
}

pub fn marginal_gain(state: &CohortState<'_>, metric: Metric, i: usize) -> Result<f64> {
    match metric {
        Metric::Auroc => auroc_marginal_gain(state, i),
        Metric::Auprc => auprc_marginal_gain(state, i),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanStep {
    /// Cohort position of the acquired sample.
    pub sample: usize,
    /// Metric change realized by this acquisition.
    pub gain: f64,
    /// Metric after this acquisition.
    pub metric: f64,
}

/// Ordered greedy acquisitions with the metric trajectory they produce.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionPlan {
    pub metric: Metric,
    pub mode: OracleMode,
    /// Metric before any acquisition.
    pub initial_metric: f64,
    pub steps: Vec<PlanStep>,
}

impl AcquisitionPlan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.sample).collect()
    }

    /// Metric after the first `t` acquisitions.
    pub fn metric_after(&self, t: usize) -> f64 {
        if t == 0 {
            self.initial_metric
        } else {
            self.steps[t - 1].metric
        }
    }
}

pub(crate) trait GreedyEngine {
    fn metric(&self) -> f64;
    /// Gain of acquiring unacquired sample `i` in the current state.
    fn gain(&self, i: usize) -> f64;
    /// Unacquired sample with the largest gain, lowest position on ties.
    fn best(&self) -> Option<usize>;
    fn apply(&mut self, i: usize);
}

/// Greedy metric oracle against the evolving state.
pub fn greedy_oracle_select(
    cohort: &Cohort,
    metric: Metric,
    budget: usize,
) -> Result<AcquisitionPlan> {
    greedy_oracle_select_with_mode(cohort, metric, budget, OracleMode::Evolving)
}

pub fn greedy_oracle_select_with_mode(
    cohort: &Cohort,
    metric: Metric,
    budget: usize,
    mode: OracleMode,
) -> Result<AcquisitionPlan> {
    if budget > cohort.len() {
        return Err(CamaError::Precondition(format!(
            "budget {budget} exceeds cohort size {}",
            cohort.len()
        )));
    }
    let steps = match metric {
        Metric::Auroc => run_greedy(auroc::AurocEngine::new(cohort)?, cohort.len(), budget, mode),
        Metric::Auprc => run_greedy(auprc::AuprcEngine::new(cohort)?, cohort.len(), budget, mode),
    };
    Ok(AcquisitionPlan {
        metric,
        mode,
        initial_metric: steps.0,
        steps: steps.1,
    })
}

fn run_greedy<E: GreedyEngine>(
    mut engine: E,
    n: usize,
    budget: usize,
    mode: OracleMode,
) -> (f64, Vec<PlanStep>) {
    let initial = engine.metric();
    let frozen_order = match mode {
        OracleMode::Evolving => None,
        OracleMode::Frozen => {
            let gains: Vec<f64> = (0..n).map(|i| engine.gain(i)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
            Some(order)
        }
    };
    let mut steps = Vec::with_capacity(budget);
    for t in 0..budget {
        let j = match &frozen_order {
            Some(order) => order[t],
            None => engine.best().expect("budget never exceeds cohort size"),
        };
        let gain = engine.gain(j);
        engine.apply(j);
        steps.push(PlanStep {
            sample: j,
            gain,
            metric: engine.metric(),
        });
    }
    (initial, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::ScoreRecord;
    use crate::metrics::{auprc, auroc, LabeledScores, ScoreScale};

    fn cohort(y: &[u8], avail: &[f64], acq: &[f64]) -> Cohort {
        Cohort::new(
            (0..y.len())
                .map(|i| ScoreRecord {
                    id: i as u64,
                    label: y[i],
                    s_avail: avail[i],
                    s_acquired: acq[i],
                    s_imp: vec![],
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn auroc_gain_examples() {
        let c = cohort(&[1, 0, 0], &[0.0, 0.5, -0.5], &[1.0, 0.5, -0.5]);
        let state = CohortState::new(&c, 3).unwrap();
        assert_eq!(auroc_marginal_gain(&state, 0).unwrap(), 0.5);
        // s_acquired == s_avail
        assert_eq!(auroc_marginal_gain(&state, 1).unwrap(), 0.0);
    }

    #[test]
    fn auprc_gain_example() {
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let c = cohort(&[1, 0], &[logit(0.4), logit(0.6)], &[logit(0.9), logit(0.6)]);
        let state = CohortState::new(&c, 1).unwrap();
        let g = auprc_marginal_gain(&state, 0).unwrap();
        let before = auprc(&LabeledScores::new(&[1, 0], &[0.4, 0.6]).unwrap(), ScoreScale::Probability).unwrap();
        assert_eq!(before, 0.5);
        assert!((g - 0.5).abs() < 1e-12);
        assert_eq!(auprc_marginal_gain(&state, 1).unwrap(), 0.0);
    }

    #[test]
    fn gain_errors() {
        let c = cohort(&[1, 1], &[0.0, 1.0], &[1.0, 2.0]);
        let state = CohortState::new(&c, 1).unwrap();
        assert!(matches!(
            auroc_marginal_gain(&state, 0),
            Err(CamaError::UndefinedMetric(_))
        ));
        let c = cohort(&[0, 0], &[0.0, 1.0], &[1.0, 2.0]);
        let state = CohortState::new(&c, 1).unwrap();
        assert!(matches!(
            auprc_marginal_gain(&state, 0),
            Err(CamaError::UndefinedMetric(_))
        ));

        let c = cohort(&[1, 0], &[0.0, 1.0], &[1.0, 2.0]);
        let mut state = CohortState::new(&c, 1).unwrap();
        state.acquire(0).unwrap();
        assert!(matches!(
            auroc_marginal_gain(&state, 0),
            Err(CamaError::Precondition(_))
        ));
        assert!(matches!(state.acquire(1), Err(CamaError::Precondition(_))));
        assert!(matches!(auroc_marginal_gain(&state, 7), Err(CamaError::NotFound(7))));
        assert!(CohortState::new(&c, 3).is_err());
    }

    #[test]
    fn greedy_budget_bounds() {
        let c = cohort(&[1, 0, 1], &[0.0, 0.2, -1.0], &[1.0, -0.2, 2.0]);
        let plan = greedy_oracle_select(&c, Metric::Auroc, 0).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.metric_after(0), auroc(&c.pre_acquisition()).unwrap());
        assert!(matches!(
            greedy_oracle_select(&c, Metric::Auroc, 4),
            Err(CamaError::Precondition(_))
        ));
    }

    #[test]
    fn greedy_full_budget_ends_at_post_metric() {
        let c = cohort(
            &[1, 0, 1, 0, 0],
            &[0.0, 0.2, -1.0, 0.4, -0.3],
            &[1.0, -0.2, 2.0, 0.5, 0.1],
        );
        for metric in Metric::ALL {
            for mode in [OracleMode::Evolving, OracleMode::Frozen] {
                let plan = greedy_oracle_select_with_mode(&c, metric, 5, mode).unwrap();
                let post = metric.evaluate(&c.post_acquisition()).unwrap();
                assert!((plan.metric_after(5) - post).abs() < 1e-12);
                let mut order = plan.order();
                order.sort();
                assert_eq!(order, vec![0, 1, 2, 3, 4]);
            }
        }
    }

    #[test]
    fn greedy_ties_take_lowest_position() {
        // every acquisition is a no-op, so all gains tie at zero
        let c = cohort(&[1, 0, 1, 0], &[0.1, 0.2, 0.3, 0.4], &[0.1, 0.2, 0.3, 0.4]);
        for metric in Metric::ALL {
            let plan = greedy_oracle_select(&c, metric, 4).unwrap();
            assert_eq!(plan.order(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn oracle_mode_parsing() {
        assert_eq!("frozen".parse::<OracleMode>().unwrap(), OracleMode::Frozen);
        assert_eq!("evolving".parse::<OracleMode>().unwrap(), OracleMode::Evolving);
        assert!("lazy".parse::<OracleMode>().is_err());
    }
}
