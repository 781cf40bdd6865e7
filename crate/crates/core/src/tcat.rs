//! Time-stamped cell activity tracking.
//!
//! An [`EventLog`] is an append-only list of [`ActivityEvent`]s with
//! millisecond timestamps relative to the start of the session. Logs persist
//! as JSON Lines: a header line with session metadata followed by one event
//! per line, e.g.
//!
//! ```text
//! {"session":"s1","technology":"ivoice","workbook":"9f2c…","dwell_ms":1000,"smart_scan":false,"viewport":[31,12]}
//! {"t":0,"k":"enter","sheet":"Sales and Profit","cell":"A1","p":null}
//! {"t":1234,"k":"command","sheet":"Sales and Profit","cell":"A1","p":"jump green"}
//! ```
//!
//! Event kind tags: `enter`, `leave`, `command`, `mark`, `unmark`,
//! `scan_start`, `scan_stop`, `scan_end`, `scan_auto_stop`, `boundary`,
//! `diag`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commands::CommandSet;
use crate::harness::driver::Driver;
use crate::navengine::{NavSession, SessionConfig};
use crate::workbook::{parse_a1, CellAddress, Workbook};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    #[serde(rename = "enter")]
    CellEnter,
    #[serde(rename = "leave")]
    CellLeave,
    #[serde(rename = "command")]
    CommandIssued,
    #[serde(rename = "mark")]
    MarkError,
    #[serde(rename = "unmark")]
    UnmarkError,
    ScanStart,
    ScanStop,
    #[serde(rename = "scan_end")]
    ScanEnded,
    #[serde(rename = "scan_auto_stop")]
    ScanAutoStopped,
    #[serde(rename = "boundary")]
    BoundaryReached,
    #[serde(rename = "diag")]
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityEvent {
    pub t: u64,
    pub kind: EventKind,
    pub addr: Option<CellAddress>,
    pub payload: Option<String>,
}

impl ActivityEvent {
    pub fn new(t: u64, kind: EventKind, addr: Option<CellAddress>, payload: Option<String>) -> Self {
        Self {
            t,
            kind,
            addr,
            payload,
        }
    }

    pub fn enter(t: u64, addr: CellAddress) -> Self {
        Self::new(t, EventKind::CellEnter, Some(addr), None)
    }

    pub fn leave(t: u64, addr: CellAddress) -> Self {
        Self::new(t, EventKind::CellLeave, Some(addr), None)
    }

    pub fn to_wire(&self) -> WireEvent {
        WireEvent {
            t: self.t,
            k: self.kind,
            sheet: self.addr.as_ref().map(|a| a.sheet.clone()),
            cell: self.addr.as_ref().map(CellAddress::a1),
            p: self.payload.clone(),
        }
    }
}

/// Line format of one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEvent {
    pub t: u64,
    pub k: EventKind,
    pub sheet: Option<String>,
    pub cell: Option<String>,
    pub p: Option<String>,
}

impl TryFrom<WireEvent> for ActivityEvent {
    type Error = String;

    fn try_from(w: WireEvent) -> Result<Self, String> {
        let addr = match (w.sheet, w.cell) {
            (Some(sheet), Some(cell)) => {
                let (col, row) = parse_a1(&cell).map_err(|e| e.to_string())?;
                Some(CellAddress::new(sheet, col, row))
            }
            (None, None) => None,
            _ => return Err("`sheet` and `cell` must both be present or both null".into()),
        };
        if matches!(w.k, EventKind::CellEnter | EventKind::CellLeave) && addr.is_none() {
            return Err("enter/leave events need an address".into());
        }
        Ok(ActivityEvent::new(w.t, w.k, addr, w.p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogHeader {
    pub session: String,
    pub technology: CommandSet,
    /// Content hash of the audited workbook.
    pub workbook: String,
    pub dwell_ms: u32,
    pub smart_scan: bool,
    /// Viewport rows and columns.
    pub viewport: (u32, u32),
}

impl LogHeader {
    pub fn new(session: impl Into<String>, workbook: &Workbook, config: &SessionConfig) -> Self {
        Self {
            session: session.into(),
            technology: config.technology,
            workbook: workbook.content_hash(),
            dwell_ms: config.dwell_ms,
            smart_scan: config.smart_scan,
            viewport: (config.viewport_rows, config.viewport_cols),
        }
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            technology: self.technology,
            dwell_ms: self.dwell_ms,
            smart_scan: self.smart_scan,
            viewport_rows: self.viewport.0,
            viewport_cols: self.viewport.1,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TcatError {
    #[error("event {index} at t={t} precedes the previous event at t={last}")]
    MonotonicityViolation { index: usize, t: u64, last: u64 },
    #[error("event {index}: {reason}")]
    StructureError { index: usize, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("log is empty: missing header line")]
    MissingHeader,
    #[error("log was recorded against a different workbook")]
    WorkbookMismatch,
    #[error("replay diverges from the log at event {index}")]
    ReplayMismatch { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub header: LogHeader,
    events: Vec<ActivityEvent>,
}

/// One stay in a cell: entered at `enter_t`, left at `leave_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Visit {
    pub addr: CellAddress,
    pub enter_t: u64,
    pub leave_t: u64,
}

impl Visit {
    pub fn dwell_ms(&self) -> u64 {
        self.leave_t - self.enter_t
    }
}

impl EventLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn events(&self) -> &[ActivityEvent] {
        &self.events
    }

    pub fn technology(&self) -> CommandSet {
        self.header.technology
    }

    pub fn last_t(&self) -> Option<u64> {
        self.events.last().map(|e| e.t)
    }

    /// Append, rejecting timestamps earlier than the last one.
    pub fn record(&mut self, event: ActivityEvent) -> Result<(), TcatError> {
        if let Some(last) = self.last_t() {
            if event.t < last {
                return Err(TcatError::MonotonicityViolation {
                    index: self.events.len(),
                    t: event.t,
                    last,
                });
            }
        }
        self.events.push(event);
        Ok(())
    }

    /// Session length from the first to the last event.
    pub fn duration_ms(&self) -> u64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0,
        }
    }

    /// Pair every enter with its leave. A final enter that was never left is
    /// closed at the timestamp of the last event.
    pub fn visits(&self) -> Result<Vec<Visit>, TcatError> {
        let mut out = Vec::new();
        let mut open: Option<(CellAddress, u64)> = None;
        for (index, e) in self.events.iter().enumerate() {
            match e.kind {
                EventKind::CellEnter => {
                    if let Some((prev, _)) = &open {
                        return Err(TcatError::StructureError {
                            index,
                            reason: format!("enter while still in {prev}"),
                        });
                    }
                    open = Some((e.addr.clone().expect("validated"), e.t));
                }
                EventKind::CellLeave => {
                    let addr = e.addr.as_ref().expect("validated");
                    match open.take() {
                        Some((entered, enter_t)) if &entered == addr => out.push(Visit {
                            addr: entered,
                            enter_t,
                            leave_t: e.t,
                        }),
                        Some((entered, _)) => {
                            return Err(TcatError::StructureError {
                                index,
                                reason: format!("leave {addr} while in {entered}"),
                            })
                        }
                        None => {
                            return Err(TcatError::StructureError {
                                index,
                                reason: format!("leave {addr} without enter"),
                            })
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some((addr, enter_t)) = open {
            out.push(Visit {
                addr,
                enter_t,
                leave_t: self.last_t().unwrap_or(enter_t),
            });
        }
        Ok(out)
    }

    /// Canonical JSON Lines, newline terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(&e.to_wire()).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TcatError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TcatError::MissingHeader)?;
        let header: LogHeader = serde_json::from_str(first).map_err(|e| TcatError::Parse {
            line: 1,
            reason: e.to_string(),
        })?;
        let mut log = EventLog::new(header);
        for (i, line) in lines {
            let wire: WireEvent = serde_json::from_str(line).map_err(|e| TcatError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            let event = ActivityEvent::try_from(wire).map_err(|reason| TcatError::Parse {
                line: i + 1,
                reason,
            })?;
            log.record(event)?;
        }
        Ok(log)
    }
}

impl fmt::Display for ActivityEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8} {:?}", self.t, self.kind)?;
        if let Some(a) = &self.addr {
            write!(f, " {a}")?;
        }
        if let Some(p) = &self.payload {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Re-run a log's commands through a fresh engine with the logged timestamps
/// and check that the resulting event stream matches the log exactly.
pub fn replay(log: &EventLog, workbook: &Workbook) -> Result<NavSession, TcatError> {
    if log.header.workbook != workbook.content_hash() {
        return Err(TcatError::WorkbookMismatch);
    }
    let mut driver = Driver::new(
        workbook.clone(),
        log.header.session.clone(),
        log.header.session_config(),
    );
    if log.events().is_empty() {
        return Ok(driver.into_session());
    }
    for e in log.events() {
        if e.kind == EventKind::CommandIssued {
            driver.command(e.payload.as_deref().unwrap_or(""), e.t);
        }
    }
    if let Some(end) = log.last_t() {
        driver.tick(end);
    }
    let produced = driver.log().events();
    let expected = log.events();
    if let Some(index) = produced.iter().zip(expected).position(|(a, b)| a != b) {
        return Err(TcatError::ReplayMismatch { index });
    }
    if produced.len() != expected.len() {
        return Err(TcatError::ReplayMismatch {
            index: produced.len().min(expected.len()),
        });
    }
    Ok(driver.into_session())
}
