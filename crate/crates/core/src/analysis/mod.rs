//! Performance measures computed from activity logs.
//!
//! Coverage and error scores per session, per-cell scan times, reference and
//! blank-gap navigation times, and an exact one-sided rank-sum test for
//! comparing two groups of sessions.

mod coverage;
mod ranksum;
mod timing;

use serde::Serialize;
use thiserror::Error;

use crate::num::{mean, Scalar};
use crate::tcat::{EventLog, TcatError};
use crate::workbook::Workbook;

pub use coverage::{coverage, errors_found, marks_from_log, CoverageMode, ErrorScore};
pub use ranksum::{rank_sum_test, RankSumResult, MAX_EXACT_N};
pub use timing::{blank_jump_times, ref_nav_times, scan_region_stats, RefNavTimes};

/// Averages of navigation times are only trusted with this many samples.
pub const MIN_RELIABLE_SAMPLES: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("workbook has no numeric or formula cells")]
    DegenerateWorkbook,
    #[error("no seeded errors to score against")]
    DegenerateSpec,
    #[error("exact test needs n + m <= {MAX_EXACT_N}, got {n} + {m}")]
    ExactModeUnavailable { n: usize, m: usize },
    #[error("both samples must be non-empty")]
    EmptySample,
    #[error("samples must be finite")]
    NonFinite,
    #[error(transparent)]
    Log(#[from] TcatError),
}

/// Mean of `values` and whether enough samples back it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Average<T> {
    pub value: T,
    pub reliable: bool,
}

pub fn average<T: Scalar>(values: &[T]) -> Option<Average<T>> {
    mean(values).map(|value| Average {
        value,
        reliable: values.len() >= MIN_RELIABLE_SAMPLES,
    })
}

/// Measures for one audit session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditMetrics<T> {
    pub coverage_pct: T,
    pub errors_found_pct: Option<T>,
    pub false_marks: usize,
    pub duration_min: T,
    pub scan_cell_avg_s: Option<T>,
    pub ref_nav_times_s: Vec<T>,
    pub ref_nav_back_s: Vec<T>,
    pub blank_jump_times_s: Vec<T>,
}

impl<T: Scalar> AuditMetrics<T> {
    /// Error scoring is skipped (`None`) when the workbook carries no
    /// seeded errors.
    pub fn compute(
        log: &EventLog,
        workbook: &Workbook,
        mode: CoverageMode,
    ) -> Result<Self, AnalysisError> {
        let coverage_pct = coverage(log, workbook, mode)?;
        let marks = marks_from_log(log, workbook);
        let score = match errors_found::<T>(&marks, workbook.seeded_errors()) {
            Ok(s) => Some(s),
            Err(AnalysisError::DegenerateSpec) => None,
            Err(e) => return Err(e),
        };
        let nav = ref_nav_times(log, workbook)?;
        Ok(Self {
            coverage_pct,
            errors_found_pct: score.as_ref().map(|s| s.pct),
            false_marks: score.as_ref().map_or(marks.len(), |s| s.false_count),
            duration_min: T::from_ms(log.duration_ms()) / T::lit(60.0),
            scan_cell_avg_s: scan_region_stats(log)?,
            ref_nav_times_s: nav.outbound,
            ref_nav_back_s: nav.back,
            blank_jump_times_s: blank_jump_times(log, workbook)?,
        })
    }
}
