//! CSV schemas.
//!
//! Cohort files: `id,label,s_avail,s_acquired,s_imp_0,...,s_imp_{K-1}`.
//! Curve exports: `strategy,metric,task,run,b,value,m_pre,m_post`.
//! Gain reports: `strategy,metric,task,g_full_mean,g_full_sem,n_runs,n_dropped_tasks`.
//!
//! Floats are written with 17 significant digits so doubles round-trip
//! bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::cohort::{Cohort, ScoreRecord};
use crate::error::{CamaError, Result};
use crate::evaluation::{CurveRecord, GainRow};

pub const CURVE_HEADER: &str = "strategy,metric,task,run,b,value,m_pre,m_post";
pub const REPORT_HEADER: &str =
    "strategy,metric,task,g_full_mean,g_full_sem,n_runs,n_dropped_tasks";

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cohort_header(k: usize) -> String {
    let mut header = String::from("id,label,s_avail,s_acquired");
    for i in 0..k {
        header.push_str(&format!(",s_imp_{i}"));
    }
    header
}

pub fn write_cohort<W: Write>(cohort: &Cohort, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", cohort_header(cohort.k()))?;
    for r in cohort.records() {
        write!(
            out,
            "{},{},{},{}",
            r.id,
            r.label,
            format_float(r.s_avail),
            format_float(r.s_acquired)
        )?;
        for &s in &r.s_imp {
            write!(out, ",{}", format_float(s))?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_cohort_file(cohort: &Cohort, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CamaError::io(path, e))?;
    write_cohort(cohort, file).map_err(|e| CamaError::io(path, e))
}

/// One problem found while checking a cohort file. `line` is 1-based with the
/// header on line 1; 0 means the problem is not tied to a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortScan {
    pub records: Vec<ScoreRecord>,
    pub k: usize,
    pub issues: Vec<Issue>,
}

impl CohortScan {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.records.iter().filter(|r| r.label == 1).count()
    }
}

fn header_issue(fields: &csv::StringRecord) -> Option<(usize, String)> {
    let names: Vec<&str> = fields.iter().map(str::trim).collect();
    let fixed = ["id", "label", "s_avail", "s_acquired"];
    if names.len() < fixed.len() || names[..4] != fixed {
        return Some((0, format!("header must start with {}", fixed.join(","))));
    }
    for (i, name) in names[4..].iter().enumerate() {
        let want = format!("s_imp_{i}");
        if *name != want {
            return Some((0, format!("header column {} is '{name}', expected '{want}'", i + 5)));
        }
    }
    None
}

/// Parses a cohort file, collecting every schema violation instead of
/// stopping at the first.
pub fn scan_cohort<R: Read>(input: R) -> Result<CohortScan> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let mut issues = Vec::new();
    let header = reader.headers().map_err(|e| csv_error("<header>", e))?.clone();
    if let Some((_, msg)) = header_issue(&header) {
        issues.push(Issue { line: 1, message: msg });
        return Ok(CohortScan { records: vec![], k: 0, issues });
    }
    let width = header.len();
    let k = width - 4;
    let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();

    let mut records = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error("<input>", e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            issues.push(Issue {
                line,
                message: format!("expected {width} columns, found {}", row.len()),
            });
            continue;
        }
        let mut bad = false;
        let id = match row[0].trim().parse::<u64>() {
            Ok(id) => Some(id),
            Err(_) => {
                issues.push(Issue {
                    line,
                    message: format!("id '{}' is not a non-negative integer", &row[0]),
                });
                bad = true;
                None
            }
        };
        let label = match row[1].trim() {
            "0" => 0,
            "1" => 1,
            other => {
                issues.push(Issue {
                    line,
                    message: format!("label '{other}' is not 0 or 1"),
                });
                bad = true;
                0
            }
        };
        let mut values = Vec::with_capacity(width - 2);
        for (col, raw) in row.iter().enumerate().skip(2) {
            match raw.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(v) => {
                    issues.push(Issue {
                        line,
                        message: format!("column {} is not finite ({v})", names[col]),
                    });
                    bad = true;
                }
                Err(_) => {
                    issues.push(Issue {
                        line,
                        message: format!("column {} value '{raw}' is not a number", names[col]),
                    });
                    bad = true;
                }
            }
        }
        if let Some(id) = id {
            if let Some(first) = seen.insert(id, line) {
                issues.push(Issue {
                    line,
                    message: format!("duplicate id {id} (first seen on line {first})"),
                });
                bad = true;
            }
        }
        if !bad {
            records.push(ScoreRecord {
                id: id.unwrap(),
                label,
                s_avail: values[0],
                s_acquired: values[1],
                s_imp: values[2..].to_vec(),
            });
        }
    }
    if records.is_empty() && issues.is_empty() {
        issues.push(Issue { line: 0, message: "file has no samples".into() });
    }
    Ok(CohortScan { records, k, issues })
}

fn csv_error(path: &str, e: csv::Error) -> CamaError {
    let line = e.position().map_or(0, |p| p.line());
    CamaError::Data { path: path.into(), line, message: e.to_string() }
}

fn relabel(path: &Path, e: CamaError) -> CamaError {
    match e {
        CamaError::Data { line, message, .. } => CamaError::Data {
            path: path.display().to_string(),
            line,
            message,
        },
        other => other,
    }
}

pub fn read_cohort<R: Read>(input: R, name: &str) -> Result<Cohort> {
    let scan = scan_cohort(input)?;
    if let Some(issue) = scan.issues.first() {
        return Err(CamaError::Data {
            path: name.into(),
            line: issue.line,
            message: issue.message.clone(),
        });
    }
    Cohort::new(scan.records)
}

pub fn read_cohort_file(path: &Path) -> Result<Cohort> {
    let file = File::open(path).map_err(|e| CamaError::io(path, e))?;
    read_cohort(file, &path.display().to_string()).map_err(|e| relabel(path, e))
}

pub fn write_curves<W: Write>(curves: &[CurveRecord], out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{CURVE_HEADER}")?;
    for rec in curves {
        let c = &rec.curve;
        for (b, v) in c.grid.fractions().iter().zip(&c.values) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.strategy,
                c.metric,
                rec.task,
                rec.run,
                format_float(*b),
                format_float(*v),
                format_float(c.m_pre),
                format_float(c.m_post)
            )?;
        }
    }
    out.flush()
}

pub fn write_report<W: Write>(rows: &[GainRow], out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.strategy,
            r.metric,
            r.task,
            format_float(r.g_full_mean),
            format_float(r.g_full_sem),
            r.n_runs,
            r.n_dropped_tasks
        )?;
    }
    out.flush()
}

pub fn write_file(path: &Path, write: impl FnOnce(File) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| CamaError::io(path, e))?;
    write(file).map_err(|e| CamaError::io(path, e))
}

/// One row of a curve export.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub strategy: String,
    pub metric: String,
    pub task: String,
    pub run: usize,
    pub b: f64,
    pub value: f64,
    pub m_pre: f64,
    pub m_post: f64,
}

pub fn read_curves<R: Read>(input: R, name: &str) -> Result<Vec<CurveRow>> {
    let data_err = |line: u64, message: String| CamaError::Data { path: name.into(), line, message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers().map_err(|e| relabel(Path::new(name), csv_error(name, e)))?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.join(",") != CURVE_HEADER {
        return Err(data_err(1, format!("header must be {CURVE_HEADER}")));
    }
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| relabel(Path::new(name), csv_error(name, e)))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 8 {
            return Err(data_err(line, format!("expected 8 columns, found {}", row.len())));
        }
        let float = |i: usize| -> Result<f64> {
            row[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| data_err(line, format!("column {} value '{}' is not a finite number", names_at(i), &row[i])))
        };
        rows.push(CurveRow {
            strategy: row[0].trim().to_string(),
            metric: row[1].trim().to_string(),
            task: row[2].trim().to_string(),
            run: row[3]
                .trim()
                .parse()
                .map_err(|_| data_err(line, format!("run '{}' is not an integer", &row[3])))?,
            b: float(4)?,
            value: float(5)?,
            m_pre: float(6)?,
            m_post: float(7)?,
        });
    }
    Ok(rows)
}

fn names_at(i: usize) -> &'static str {
    ["strategy", "metric", "task", "run", "b", "value", "m_pre", "m_post"][i]
}

pub fn read_curves_file(path: &Path) -> Result<Vec<CurveRow>> {
    let file = File::open(path).map_err(|e| CamaError::io(path, e))?;
    read_curves(file, &path.display().to_string())
}
