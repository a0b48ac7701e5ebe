mod common;

use cama_core::evaluation::CurveRecord;
use cama_core::io::{read_cohort, read_curves, write_cohort, write_curves};
use cama_core::metrics::auroc;
use cama_core::simulation::{aggregate, SweepOptions};
use cama_core::strategies::{priority_scores, select_top};
use cama_core::{
    g_full, generate, sweep, BudgetGrid, Metric, PerformanceCurve, Rounding, Strategy,
    SynthConfig,
};
use common::{brute_auprc, brute_auroc, substituted};
use proptest::prelude::*;
use proptest::strategy::Strategy as _;

fn synth(n: usize, k: usize, seed: u64) -> cama_core::Cohort {
    generate(&SynthConfig { n, k, seed, ..Default::default() }).unwrap()
}

#[test]
fn sweep_matches_prefix_recomputation() {
    let c = synth(20, 4, 5);
    let grid = BudgetGrid::uniform(11).unwrap();
    for strategy in Strategy::ALL {
        for metric in Metric::ALL {
            let opts = SweepOptions { seed: 3, ..Default::default() };
            let curve = sweep(&c, strategy, metric, &grid, &opts).unwrap();
            let order = match strategy.oracle_metric() {
                Some(m) => cama_core::greedy_oracle_select(&c, m, c.len()).unwrap().order(),
                None => select_top(&priority_scores(&c, strategy, 3).unwrap(), c.len()).unwrap(),
            };
            for (k, &b) in grid.fractions().iter().enumerate() {
                let count = (b * 20.0).round() as usize;
                let s = substituted(&c, &order[..count]);
                let want = match metric {
                    Metric::Auroc => brute_auroc(c.labels(), &s),
                    Metric::Auprc => brute_auprc(c.labels(), &s),
                };
                assert!(
                    (curve.values[k] - want).abs() <= 1e-12,
                    "{strategy} {metric} b={b}: {} vs {want}",
                    curve.values[k]
                );
            }
            assert!((curve.values[0] - curve.m_pre).abs() <= 1e-12);
            assert!((curve.values[10] - curve.m_post).abs() <= 1e-12);
        }
    }
}

#[test]
fn random_sweeps_depend_only_on_seed() {
    let c = synth(200, 2, 9);
    let grid = BudgetGrid::default();
    let run = |seed| {
        sweep(&c, Strategy::Random, Metric::Auroc, &grid, &SweepOptions { seed, ..Default::default() })
            .unwrap()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1).values, run(2).values);
}

#[test]
fn rounding_rules_shape_the_counts() {
    let grid = BudgetGrid::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
    assert_eq!(grid.counts(10, Rounding::Nearest), vec![0, 3, 5, 10]);
    assert_eq!(grid.counts(10, Rounding::Floor), vec![0, 2, 5, 10]);
    assert_eq!(grid.counts(10, Rounding::Ceil), vec![0, 3, 5, 10]);
    assert!(BudgetGrid::new(vec![0.0, 0.5]).is_err());
    assert!(BudgetGrid::new(vec![0.0, 0.6, 0.4, 1.0]).is_err());
    assert!(BudgetGrid::uniform(1).is_err());
}

fn curve_on(fractions: Vec<f64>, values: Vec<f64>, m_pre: f64, m_post: f64) -> PerformanceCurve {
    PerformanceCurve {
        strategy: Strategy::Random,
        metric: Metric::Auroc,
        grid: BudgetGrid::new(fractions).unwrap(),
        values,
        m_pre,
        m_post,
    }
}

fn sorted_grid() -> impl proptest::strategy::Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..999, 0..20).prop_map(|inner| {
        let mut g = vec![0.0];
        g.extend(inner.into_iter().map(|k| k as f64 / 1000.0));
        g.push(1.0);
        g
    })
}

proptest! {
    #[test]
    fn g_full_reference_curves(grid in sorted_grid(), m_pre in 0.1f64..0.6, gap in 0.01f64..0.4) {
        let m_post = m_pre + gap;
        let n = grid.len();
        let flat_pre = curve_on(grid.clone(), vec![m_pre; n], m_pre, m_post);
        prop_assert!(g_full(&flat_pre).unwrap().abs() <= 1e-12);
        let linear: Vec<f64> = grid.iter().map(|&b| m_pre + b * gap).collect();
        let lin = curve_on(grid.clone(), linear, m_pre, m_post);
        prop_assert!((g_full(&lin).unwrap() - 0.5).abs() <= 1e-12);
        let flat_post = curve_on(grid, vec![m_post; n], m_pre, m_post);
        prop_assert!((g_full(&flat_post).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn aggregate_brackets_the_runs(values in prop::collection::vec(-2.0f64..2.0, 1..30)) {
        let (mean, sem) = aggregate(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= mean && mean <= hi);
        prop_assert!(sem >= 0.0);
    }

    #[test]
    fn cohort_csv_round_trips(n in 1usize..40, k in 0usize..4, seed in any::<u64>()) {
        let c = synth(n, k, seed);
        let mut buf = Vec::new();
        write_cohort(&c, &mut buf).unwrap();
        let back = read_cohort(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn degenerate_gap_is_an_error() {
    let c = curve_on(vec![0.0, 1.0], vec![0.7, 0.7], 0.7, 0.7 + 1e-10);
    assert!(g_full(&c).is_err());
}

#[test]
fn curves_csv_round_trips() {
    let c = synth(50, 2, 1);
    let grid = BudgetGrid::uniform(5).unwrap();
    let curve = sweep(&c, Strategy::ExpectedKl, Metric::Auprc, &grid, &SweepOptions::default()).unwrap();
    let rec = CurveRecord { task: "t".into(), run: 0, curve: curve.clone() };
    let mut buf = Vec::new();
    write_curves(&[rec], &mut buf).unwrap();
    let rows = read_curves(buf.as_slice(), "mem").unwrap();
    assert_eq!(rows.len(), 5);
    for (row, (&b, &v)) in rows.iter().zip(grid.fractions().iter().zip(&curve.values)) {
        assert_eq!((row.b, row.value, row.m_pre, row.m_post), (b, v, curve.m_pre, curve.m_post));
    }
}

#[test]
fn acquisition_helps_for_nearly_every_seed() {
    let seeds = 100;
    let improved = (0..seeds)
        .filter(|&seed| {
            let c = synth(2000, 0, seed);
            auroc(&c.post_acquisition()).unwrap() > auroc(&c.pre_acquisition()).unwrap()
        })
        .count();
    assert!(improved * 100 >= 95 * seeds as usize, "{improved}/{seeds}");
}

#[test]
fn synthetic_seed_stream_is_stable() {
    let a = synth(30, 3, 77);
    let b = synth(30, 3, 77);
    let mut ba = Vec::new();
    let mut bb = Vec::new();
    write_cohort(&a, &mut ba).unwrap();
    write_cohort(&b, &mut bb).unwrap();
    assert_eq!(ba, bb);
}
