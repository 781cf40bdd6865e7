//! Spreadsheet audit navigation engine.
//!
//! The crate models a voice-driven audit session over a workbook: reference
//! colour shortcuts, timed scanning, blank-cell jumps and error marks. Every
//! cell enter and leave is logged with a timestamp so sessions can be replayed
//! and analysed (coverage, per-cell scan time, navigation latencies, exact
//! rank-sum tests). A latency simulator compares a conventional dictation
//! command set with the shortcut command set.
//!
//! Numeric analysis and simulation are generic over [`Scalar`]; the `*F64` and
//! `*F32` aliases below fix the precision.

pub mod analysis;
pub mod commands;
pub mod formula;
pub mod harness;
pub mod navengine;
pub mod num;
pub mod tcat;
pub mod workbook;

pub use num::Scalar;

pub use commands::{interpret, CommandSet, ParsedCommand};
pub use navengine::{ColorName, Direction, NavSession, SessionConfig};
pub use tcat::{ActivityEvent, EventKind, EventLog};
pub use workbook::{CellAddress, CellContent, Sheet, Workbook};

pub type AuditMetricsF64 = analysis::AuditMetrics<f64>;
pub type AuditMetricsF32 = analysis::AuditMetrics<f32>;
pub type RankSumF64 = analysis::RankSumResult<f64>;
pub type RankSumF32 = analysis::RankSumResult<f32>;
pub type LatencyProfileF64 = harness::sim::LatencyProfile<f64>;
pub type LatencyProfileF32 = harness::sim::LatencyProfile<f32>;
pub type SimReportF64 = harness::sim::SimReport<f64>;
pub type SimReportF32 = harness::sim::SimReport<f32>;
