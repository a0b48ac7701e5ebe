//! Cohort-level modality acquisition simulation.
//!
//! Given per-sample pre-acquisition, post-acquisition and imputed logits,
//! the crate ranks samples for acquisition under a budget with a family of
//! acquisition strategies, sweeps budgets to build performance curves and
//! reports each strategy's normalized area of gain.

pub mod cohort;
pub mod error;
pub mod evaluation;
pub mod gains;
pub mod io;
pub mod metrics;
pub mod plot;
pub mod rank_index;
pub mod simulation;
pub mod strategies;
pub mod synth;

pub use cohort::{Cohort, ScoreRecord};
pub use error::{CamaError, Result};
pub use evaluation::{evaluate, RunConfig, Task};
pub use gains::{greedy_oracle_select, AcquisitionPlan, CohortState, OracleMode};
pub use metrics::{LabeledScores, Metric, Probability};
pub use simulation::{g_full, sweep, BudgetGrid, PerformanceCurve, Rounding};
pub use strategies::Strategy;
pub use synth::{generate, SynthConfig};
