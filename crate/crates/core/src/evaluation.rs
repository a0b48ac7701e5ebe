//! Full strategy comparison over tasks, metrics and runs.
//!
//! Work items are (task, strategy, run) triples, except that strategies which
//! ignore the seed are computed once per task and shared by every run. Items
//! run on the ambient rayon pool; results are collected in item order, so the
//! output never depends on scheduling.

use rayon::prelude::*;

use crate::cohort::Cohort;
use crate::error::{CamaError, Result};
use crate::gains::OracleMode;
use crate::metrics::Metric;
use crate::simulation::{
    acquisition_order, aggregate, curve_from_order, filter_tasks, g_full, BudgetGrid, DroppedTask,
    PerformanceCurve, Rounding, SweepOptions, TaskAnchors,
};
use crate::strategies::Strategy;

/// Task name used for rows pooled over every retained task.
pub const POOLED_TASK: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strategies: Vec<Strategy>,
    pub metrics: Vec<Metric>,
    pub grid: BudgetGrid,
    pub rounding: Rounding,
    pub runs: usize,
    pub base_seed: u64,
    pub filter_negative: bool,
    pub oracle_mode: OracleMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategies: Strategy::ALL.to_vec(),
            metrics: Metric::ALL.to_vec(),
            grid: BudgetGrid::default(),
            rounding: Rounding::Nearest,
            runs: 5,
            base_seed: 0,
            filter_negative: true,
            oracle_mode: OracleMode::Evolving,
        }
    }
}

impl RunConfig {
    /// Seed of run `r`: `base_seed + r` (wrapping).
    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(CamaError::Config("no strategies requested".into()));
        }
        if self.metrics.is_empty() {
            return Err(CamaError::Config("no metrics requested".into()));
        }
        if self.runs == 0 {
            return Err(CamaError::Config("at least one run is required".into()));
        }
        Ok(())
    }
}

/// A named cohort to evaluate.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub cohort: Cohort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub task: String,
    pub run: usize,
    pub curve: PerformanceCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub strategy: Strategy,
    pub metric: Metric,
    pub task: String,
    pub g_full_mean: f64,
    pub g_full_sem: f64,
    pub n_runs: usize,
    pub n_dropped_tasks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Sorted by strategy id, metric, task and run.
    pub curves: Vec<CurveRecord>,
    /// Sorted by strategy id, metric and task.
    pub report: Vec<GainRow>,
    pub dropped: Vec<(Metric, DroppedTask)>,
}

fn check_inputs(tasks: &[Task], config: &RunConfig) -> Result<()> {
    config.validate()?;
    if tasks.is_empty() {
        return Err(CamaError::Config("no tasks to evaluate".into()));
    }
    let mut names: Vec<&str> = tasks.iter().map(|t| t.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CamaError::Config(format!("duplicate task name '{}'", w[0])));
    }
    let needs_imp: Vec<&str> = config
        .strategies
        .iter()
        .filter(|s| s.needs_imputations())
        .map(|s| s.id())
        .collect();
    for task in tasks {
        if !needs_imp.is_empty() && task.cohort.k() == 0 {
            return Err(CamaError::Config(format!(
                "task '{}' has no imputed scores (K = 0) but imputation strategies were requested: {}",
                task.name,
                needs_imp.join(", ")
            )));
        }
        for &metric in &config.metrics {
            metric.evaluate(&task.cohort.pre_acquisition()).map_err(|e| match e {
                CamaError::UndefinedMetric(msg) => {
                    CamaError::UndefinedMetric(format!("task '{}': {msg}", task.name))
                }
                other => other,
            })?;
        }
        let oracle_auroc = config.strategies.contains(&Strategy::OracleAuroc);
        if oracle_auroc && (task.cohort.n_positive() == 0 || task.cohort.n_negative() == 0) {
            return Err(CamaError::UndefinedMetric(format!(
                "task '{}': oracle_auroc needs both classes",
                task.name
            )));
        }
    }
    Ok(())
}

pub fn evaluate(tasks: &[Task], config: &RunConfig) -> Result<Evaluation> {
    check_inputs(tasks, config)?;

    let mut items: Vec<(usize, Strategy, Option<usize>)> = Vec::new();
    for t in 0..tasks.len() {
        for &s in &config.strategies {
            if s.is_seeded() {
                items.extend((0..config.runs).map(|r| (t, s, Some(r))));
            } else {
                items.push((t, s, None));
            }
        }
    }

    let results: Vec<Vec<PerformanceCurve>> = items
        .par_iter()
        .map(|&(t, strategy, run)| {
            let cohort = &tasks[t].cohort;
            let options = SweepOptions {
                seed: config.run_seed(run.unwrap_or(0)),
                rounding: config.rounding,
                oracle_mode: config.oracle_mode,
            };
            let order = acquisition_order(cohort, strategy, &options)?;
            config
                .metrics
                .iter()
                .map(|&m| curve_from_order(cohort, strategy, &order, m, &config.grid, config.rounding))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for (&(t, _, run), task_curves) in items.iter().zip(results) {
        let runs: Vec<usize> = match run {
            Some(r) => vec![r],
            None => (0..config.runs).collect(),
        };
        for curve in task_curves {
            for &r in &runs {
                curves.push(CurveRecord {
                    task: tasks[t].name.clone(),
                    run: r,
                    curve: curve.clone(),
                });
            }
        }
    }
    curves.sort_by(|a, b| {
        (a.curve.strategy.id(), a.curve.metric, &a.task, a.run)
            .cmp(&(b.curve.strategy.id(), b.curve.metric, &b.task, b.run))
    });

    let mut dropped = Vec::new();
    let mut report = Vec::new();
    for &metric in &config.metrics {
        let anchors: Vec<TaskAnchors> = tasks
            .iter()
            .map(|task| {
                Ok(TaskAnchors {
                    task: task.name.clone(),
                    m_pre: metric.evaluate(&task.cohort.pre_acquisition())?,
                    m_post: metric.evaluate(&task.cohort.post_acquisition())?,
                })
            })
            .collect::<Result<_>>()?;
        let outcome = filter_tasks(&anchors, config.filter_negative);
        let n_dropped = outcome.dropped.len();
        dropped.extend(outcome.dropped.into_iter().map(|d| (metric, d)));

        for &strategy in &config.strategies {
            let mut pooled = Vec::new();
            for task in &outcome.retained {
                let values: Vec<f64> = curves
                    .iter()
                    .filter(|c| {
                        c.curve.strategy == strategy && c.curve.metric == metric && &c.task == task
                    })
                    .map(|c| g_full(&c.curve))
                    .collect::<Result<_>>()?;
                let (mean, sem) = aggregate(&values)?;
                report.push(GainRow {
                    strategy,
                    metric,
                    task: task.clone(),
                    g_full_mean: mean,
                    g_full_sem: sem,
                    n_runs: values.len(),
                    n_dropped_tasks: n_dropped,
                });
                pooled.extend(values);
            }
            if outcome.retained.len() > 1 {
                let (mean, sem) = aggregate(&pooled)?;
                report.push(GainRow {
                    strategy,
                    metric,
                    task: POOLED_TASK.to_string(),
                    g_full_mean: mean,
                    g_full_sem: sem,
                    n_runs: pooled.len(),
                    n_dropped_tasks: n_dropped,
                });
            }
        }
    }
    report.sort_by(|a, b| {
        (a.strategy.id(), a.metric, &a.task).cmp(&(b.strategy.id(), b.metric, &b.task))
    });

    Ok(Evaluation {
        curves,
        report,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    fn task(name: &str, seed: u64, k: usize) -> Task {
        let cfg = SynthConfig { n: 80, k, seed, ..Default::default() };
        Task { name: name.into(), cohort: generate(&cfg).unwrap() }
    }

    #[test]
    fn seeds_are_additive() {
        let cfg = RunConfig { base_seed: 40, ..Default::default() };
        assert_eq!(cfg.run_seed(0), 40);
        assert_eq!(cfg.run_seed(3), 43);
    }

    #[test]
    fn rejects_imputation_strategies_without_imputations() {
        let err = evaluate(&[task("a", 1, 0)], &RunConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, CamaError::Config(_)));
        for id in ["exp_kl", "exp_prob", "exp_uncert", "exp_rank"] {
            assert!(msg.contains(id), "{msg}");
        }
    }

    #[test]
    fn rejects_single_class_for_auroc() {
        let mut records = task("a", 1, 2).cohort.records().to_vec();
        for r in &mut records {
            r.label = 1;
        }
        let t = Task { name: "a".into(), cohort: Cohort::new(records).unwrap() };
        let cfg = RunConfig { strategies: vec![Strategy::Random], metrics: vec![Metric::Auroc], ..Default::default() };
        assert!(matches!(evaluate(&[t], &cfg), Err(CamaError::UndefinedMetric(_))));
    }

    #[test]
    fn report_shape() {
        let tasks = [task("a", 1, 3), task("b", 2, 3)];
        let cfg = RunConfig { runs: 3, grid: BudgetGrid::uniform(5).unwrap(), ..Default::default() };
        let eval = evaluate(&tasks, &cfg).unwrap();
        assert_eq!(eval.curves.len(), 12 * 2 * 2 * 3);
        let retained_rows = eval.report.iter().filter(|r| r.task != POOLED_TASK).count();
        let dropped = eval.dropped.len();
        assert_eq!(retained_rows, 12 * (4 - dropped));
        for row in &eval.report {
            assert!(row.g_full_sem >= 0.0);
            if row.strategy != Strategy::Random && row.task != POOLED_TASK {
                assert_eq!(row.g_full_sem, 0.0);
            }
        }
        let again = evaluate(&tasks, &cfg).unwrap();
        assert_eq!(eval, again);
    }
}
