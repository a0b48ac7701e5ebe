use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cama_core::evaluation::{evaluate, RunConfig, Task};
use cama_core::io;
use cama_core::simulation::{BudgetGrid, Rounding};
use cama_core::synth::{generate, SynthConfig};
use cama_core::{CamaError, Metric, OracleMode, Strategy};
use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 2 usage error, 3 data error, 4 metric/config error.
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "cama", version, about = "Cohort-level modality acquisition simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic cohort file.
    Generate(GenerateArgs),
    /// Sweep budgets for every strategy and write curves and a gain report.
    Evaluate(EvaluateArgs),
    /// Check a cohort file against the schema.
    Validate(ValidateArgs),
    /// Render a curves file as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Imputed scores per sample (0 for none).
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    prevalence: f64,
    #[arg(long, default_value_t = 0.5)]
    signal_avail: f64,
    #[arg(long, default_value_t = 1.5)]
    signal_acquired: f64,
    #[arg(long, default_value_t = 0.8)]
    imp_fidelity: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Noise of each imputation around its centre (defaults to --noise).
    #[arg(long)]
    imp_noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Cohort file; repeat for several tasks. Use NAME=PATH to name a task,
    /// otherwise the file stem is used.
    #[arg(long = "cohort", required = true)]
    cohorts: Vec<String>,
    /// Comma-separated strategy ids, or "all".
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Comma-separated metrics (auroc, auprc).
    #[arg(long, default_value = "auroc,auprc")]
    metrics: String,
    #[arg(long, default_value_t = cama_core::simulation::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// round, floor or ceil.
    #[arg(long, default_value = "round")]
    rounding: String,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep tasks whose post-acquisition metric is below the pre-acquisition one.
    #[arg(long)]
    keep_negative: bool,
    /// evolving or frozen.
    #[arg(long, default_value = "evolving")]
    oracle_mode: String,
    #[arg(long)]
    curves_out: PathBuf,
    #[arg(long)]
    report_out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    cohort: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    curves: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CamaError>() {
        Some(CamaError::Data { .. } | CamaError::Io { .. } | CamaError::Domain(_) | CamaError::NotFound(_)) => {
            EXIT_DATA
        }
        Some(_) => EXIT_CONFIG,
        None => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = configure_threads() {
        eprintln!("error: {err:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CAMA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("CAMA_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("could not configure the worker pool")?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<u8> {
    let config = SynthConfig {
        n: args.n,
        k: args.k,
        prevalence: args.prevalence,
        signal_avail: args.signal_avail,
        signal_acquired: args.signal_acquired,
        imp_fidelity: args.imp_fidelity,
        noise_scale: args.noise,
        imp_noise_scale: args.imp_noise,
        seed: args.seed,
    };
    let cohort = generate(&config)?;
    io::write_cohort_file(&cohort, &args.out)?;

    println!("wrote {}", args.out.display());
    println!("N = {}, K = {}", cohort.len(), cohort.k());
    println!(
        "prevalence = {:.4} ({} positive)",
        cohort.n_positive() as f64 / cohort.len() as f64,
        cohort.n_positive()
    );
    for metric in Metric::ALL {
        let pre = metric.evaluate(&cohort.pre_acquisition());
        let post = metric.evaluate(&cohort.post_acquisition());
        match (pre, post) {
            (Ok(pre), Ok(post)) => println!("{metric}: m_pre = {pre:.6}, m_post = {post:.6}"),
            _ => println!("{metric}: undefined for this cohort"),
        }
    }
    Ok(0)
}

fn parse_list<T>(raw: &str, parse: impl Fn(&str) -> Result<T, CamaError>) -> Result<Vec<T>, CamaError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect()
}

fn task_from_arg(arg: &str) -> anyhow::Result<Task> {
    let (name, path) = match arg.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            (name, path)
        }
    };
    Ok(Task {
        name,
        cohort: io::read_cohort_file(&path)?,
    })
}

fn cmd_evaluate(args: EvaluateArgs) -> anyhow::Result<u8> {
    let strategies = if args.strategies.trim() == "all" {
        Strategy::ALL.to_vec()
    } else {
        parse_list(&args.strategies, str::parse::<Strategy>)?
    };
    let config = RunConfig {
        strategies,
        metrics: parse_list(&args.metrics, str::parse::<Metric>)?,
        grid: BudgetGrid::uniform(args.grid_points)?,
        rounding: args.rounding.parse::<Rounding>()?,
        runs: args.runs,
        base_seed: args.seed,
        filter_negative: !args.keep_negative,
        oracle_mode: args.oracle_mode.parse::<OracleMode>()?,
    };
    let tasks = args
        .cohorts
        .iter()
        .map(|a| task_from_arg(a))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let result = evaluate(&tasks, &config)?;
    for (metric, d) in &result.dropped {
        eprintln!(
            "dropped task '{}' for {metric}: {} (m_pre = {:.6}, m_post = {:.6})",
            d.task, d.reason, d.m_pre, d.m_post
        );
    }
    io::write_file(&args.curves_out, |f| io::write_curves(&result.curves, f))?;
    io::write_file(&args.report_out, |f| io::write_report(&result.report, f))?;

    // a closed stdout (e.g. piped into head) is not a failure once the files are written
    let _ = print_summary(&result.report);
    Ok(0)
}

fn print_summary(report: &[cama_core::evaluation::GainRow]) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<14} {:<6} {:<16} {:>10} {:>10}", "strategy", "metric", "task", "g_full", "sem")?;
    for row in report {
        writeln!(
            out,
            "{:<14} {:<6} {:<16} {:>10.4} {:>10.4}",
            row.strategy, row.metric, row.task, row.g_full_mean, row.g_full_sem
        )?;
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<u8> {
    let path: &Path = &args.cohort;
    let file = std::fs::File::open(path).map_err(|e| CamaError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let scan = io::scan_cohort(file).map_err(anyhow::Error::from)?;
    let mut issues = scan.issues.clone();
    if scan.is_valid() {
        let n_pos = scan.n_positive();
        let n = scan.records.len();
        if n_pos == 0 || n_pos == n {
            issues.push(io::Issue {
                line: 0,
                message: format!("only one class present ({n_pos} positive of {n})"),
            });
        }
    }
    if issues.is_empty() {
        println!(
            "OK: {} samples, {} positive, K = {}",
            scan.records.len(),
            scan.n_positive(),
            scan.k
        );
        return Ok(0);
    }
    for issue in &issues {
        if issue.line > 0 {
            println!("{}: line {}: {}", path.display(), issue.line, issue.message);
        } else {
            println!("{}: {}", path.display(), issue.message);
        }
    }
    println!("{} problem(s) found", issues.len());
    Ok(EXIT_DATA)
}

fn cmd_plot(args: PlotArgs) -> anyhow::Result<u8> {
    let rows = io::read_curves_file(&args.curves)?;
    let svg = cama_core::plot::render_svg(&rows);
    std::fs::write(&args.out, svg).map_err(|e| CamaError::Io {
        path: args.out.clone(),
        source: e,
    })?;
    println!("wrote {}", args.out.display());
    Ok(0)
}
