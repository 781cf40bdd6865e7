use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gridpilot_core::analysis::{average, rank_sum_test, CoverageMode};
use gridpilot_core::{AuditMetricsF64, RankSumF64, Workbook};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    log: String,
    session: String,
    technology: String,
    group: Option<&'static str>,
    metrics: AuditMetricsF64,
}

#[derive(Serialize)]
struct Comparison {
    measure: &'static str,
    /// `None` when the test could not be run; see `note`.
    result: Option<RankSumF64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct Report {
    coverage_mode: &'static str,
    sessions: Vec<Row>,
    comparisons: Vec<Comparison>,
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

fn avg_cell(values: &[f64]) -> String {
    match average(values) {
        Some(a) if a.reliable => format!("{:.2} ({})", a.value, values.len()),
        Some(a) => format!("{:.2}* ({})", a.value, values.len()),
        None => "-".into(),
    }
}

fn compare(measure: &'static str, a: &[Option<f64>], b: &[Option<f64>]) -> Comparison {
    let a: Vec<f64> = a.iter().flatten().copied().collect();
    let b: Vec<f64> = b.iter().flatten().copied().collect();
    match rank_sum_test(&a, &b) {
        Ok(r) => Comparison {
            measure,
            result: Some(r),
            note: None,
        },
        Err(e) => Comparison {
            measure,
            result: None,
            note: Some(e.to_string()),
        },
    }
}

fn render(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:<9} {:>5} {:>9} {:>7} {:>5} {:>8} {:>11} {:>12} {:>12} {:>12}",
        "log", "tech", "group", "coverage%", "errors%", "false", "minutes", "scan s/cell", "ref out s", "ref back s", "blank jump s"
    );
    for r in &report.sessions {
        let m = &r.metrics;
        let name = Path::new(&r.log)
            .file_name()
            .map_or(r.log.clone(), |f| f.to_string_lossy().into_owned());
        let _ = writeln!(
            s,
            "{:<24} {:<9} {:>5} {:>9.1} {:>7} {:>5} {:>8.2} {:>11} {:>12} {:>12} {:>12}",
            name,
            r.technology,
            r.group.unwrap_or("-"),
            m.coverage_pct,
            opt(m.errors_found_pct, 1),
            m.false_marks,
            m.duration_min,
            opt(m.scan_cell_avg_s, 2),
            avg_cell(&m.ref_nav_times_s),
            avg_cell(&m.ref_nav_back_s),
            avg_cell(&m.blank_jump_times_s),
        );
    }
    let _ = writeln!(s, "coverage counted {}; * marks averages of fewer than 3 samples", report.coverage_mode);
    for c in &report.comparisons {
        match (&c.result, &c.note) {
            (Some(r), _) => {
                let _ = writeln!(
                    s,
                    "{}: A > B one-sided exact p = {} ({:.4}), W = {}, n = {}, m = {}",
                    c.measure,
                    r.p_exact(),
                    r.p_one_sided,
                    r.statistic,
                    r.n,
                    r.m
                );
            }
            (None, note) => {
                let _ = writeln!(s, "{}: not tested ({})", c.measure, note.as_deref().unwrap_or("?"));
            }
        }
    }
    s
}

pub fn run(
    workbook: &Workbook,
    logs: &[PathBuf],
    group_a: &[PathBuf],
    group_b: &[PathBuf],
    cumulative: bool,
    json: Option<&Path>,
) -> Result<()> {
    if group_a.is_empty() != group_b.is_empty() {
        bail!("--group-a and --group-b must be given together");
    }
    let mode = if cumulative {
        CoverageMode::Cumulative
    } else {
        CoverageMode::PerVisit
    };
    let inputs = logs
        .iter()
        .map(|p| (p, None))
        .chain(group_a.iter().map(|p| (p, Some("A"))))
        .chain(group_b.iter().map(|p| (p, Some("B"))));
    let mut sessions = Vec::new();
    for (path, group) in inputs {
        let log = crate::load_log(path)?;
        if log.header.workbook != workbook.content_hash() {
            bail!("{} was recorded against a different workbook", path.display());
        }
        let metrics = AuditMetricsF64::compute(&log, workbook, mode)
            .with_context(|| format!("analysing {}", path.display()))?;
        sessions.push(Row {
            log: path.display().to_string(),
            session: log.header.session.clone(),
            technology: log.technology().to_string(),
            group,
            metrics,
        });
    }
    if sessions.is_empty() {
        bail!("no logs given");
    }

    let mut comparisons = Vec::new();
    if !group_a.is_empty() {
        let pick = |g: &str, f: fn(&AuditMetricsF64) -> Option<f64>| -> Vec<Option<f64>> {
            sessions
                .iter()
                .filter(|r| r.group == Some(g))
                .map(|r| f(&r.metrics))
                .collect()
        };
        comparisons.push(compare(
            "coverage",
            &pick("A", |m| Some(m.coverage_pct)),
            &pick("B", |m| Some(m.coverage_pct)),
        ));
        comparisons.push(compare(
            "errors found",
            &pick("A", |m| m.errors_found_pct),
            &pick("B", |m| m.errors_found_pct),
        ));
    }

    let report = Report {
        coverage_mode: if cumulative { "cumulatively" } else { "per visit" },
        sessions,
        comparisons,
    };
    print!("{}", render(&report));
    if let Some(path) = json {
        fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
