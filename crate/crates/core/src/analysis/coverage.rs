use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::num::Scalar;
use crate::tcat::{EventKind, EventLog};
use crate::workbook::{CellAddress, Workbook};

/// A cell counts as reviewed after this much time in it (strictly more).
pub const REVIEW_THRESHOLD_MS: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Some single visit lasted longer than the threshold.
    #[default]
    PerVisit,
    /// All visits together lasted longer than the threshold.
    Cumulative,
}

/// Percentage of numeric and formula cells that were reviewed.
pub fn coverage<T: Scalar>(
    log: &EventLog,
    workbook: &Workbook,
    mode: CoverageMode,
) -> Result<T, AnalysisError> {
    let eligible = workbook.classify_eligible();
    if eligible.is_empty() {
        return Err(AnalysisError::DegenerateWorkbook);
    }
    let mut time: BTreeMap<CellAddress, u64> = BTreeMap::new();
    for v in log.visits()? {
        let Some(addr) = workbook.canonical(&v.addr) else {
            continue;
        };
        let slot = time.entry(addr).or_default();
        *slot = match mode {
            CoverageMode::PerVisit => (*slot).max(v.dwell_ms()),
            CoverageMode::Cumulative => *slot + v.dwell_ms(),
        };
    }
    let covered = eligible
        .iter()
        .filter(|a| time.get(*a).is_some_and(|&ms| ms > REVIEW_THRESHOLD_MS))
        .count();
    Ok(T::lit(100.0) * T::from_count(covered) / T::from_count(eligible.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorScore<T> {
    pub pct: T,
    pub correct: usize,
    pub false_count: usize,
}

pub fn errors_found<T: Scalar>(
    marks: &BTreeSet<CellAddress>,
    seeded: &BTreeSet<CellAddress>,
) -> Result<ErrorScore<T>, AnalysisError> {
    if seeded.is_empty() {
        return Err(AnalysisError::DegenerateSpec);
    }
    let correct = marks.intersection(seeded).count();
    Ok(ErrorScore {
        pct: T::lit(100.0) * T::from_count(correct) / T::from_count(seeded.len()),
        correct,
        false_count: marks.len() - correct,
    })
}

/// Cells still marked at the end of the session.
pub fn marks_from_log(log: &EventLog, workbook: &Workbook) -> BTreeSet<CellAddress> {
    let mut marks = BTreeSet::new();
    for e in log.events() {
        let Some(addr) = e.addr.as_ref().and_then(|a| workbook.canonical(a)) else {
            continue;
        };
        match e.kind {
            EventKind::MarkError => {
                marks.insert(addr);
            }
            EventKind::UnmarkError => {
                marks.remove(&addr);
            }
            _ => {}
        }
    }
    marks
}
