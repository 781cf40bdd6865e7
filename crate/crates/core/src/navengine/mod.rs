//! Audit session state machine.
//!
//! A [`NavSession`] owns the cursor, viewport, jump stack, colour shortcuts,
//! scan state, dwell setting and error marks for one audit. Every operation
//! takes an injected timestamp (milliseconds since session start) and returns
//! the activity events it caused; nothing reads a wall clock.
//!
//! Cursor moves always emit a `leave` of the old cell followed by an `enter`
//! of the new one, scroll the viewport minimally so the cursor stays visible,
//! and recompute the colour shortcuts for the new cell.

mod color;
mod scan;
mod viewport;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commands::CommandSet;
use crate::tcat::{ActivityEvent, EventKind};
use crate::workbook::{CellAddress, Workbook, MAX_COL, MAX_ROW};

pub use color::{ColorEntry, ColorMap, ColorName};
pub use scan::{ScanState, DWELL_STEP_MS, MAX_DWELL_MS, MIN_DWELL_MS};
pub use viewport::{is_visible, Viewport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    /// Column and row deltas of one step.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Self::Up => (0, -1),
            Self::Down => (0, 1),
            Self::Left => (-1, 0),
            Self::Right => (1, 0),
        }
    }

    /// The cell `n` steps away, if it is on the sheet.
    pub fn step(self, col: u32, row: u32, n: u32) -> Option<(u32, u32)> {
        let (dc, dr) = self.delta();
        let c = i64::from(col) + dc * i64::from(n);
        let r = i64::from(row) + dr * i64::from(n);
        ((1..=i64::from(MAX_COL)).contains(&c) && (1..=i64::from(MAX_ROW)).contains(&r))
            .then_some((c as u32, r as u32))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Up => "up",
            Self::Down => "down",
            Self::Left => "left",
            Self::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Direction::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown direction `{s}`"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NavError {
    #[error("no reference is coloured {0}")]
    NoSuchColor(ColorName),
    #[error("nothing to jump back to")]
    NothingToJumpBackTo,
    #[error("a scan is already running")]
    ScanBusy,
    #[error("no sheet named `{0}`")]
    UnknownSheet(String),
    #[error("{0} is outside the sheet")]
    OutOfBounds(String),
}

impl NavError {
    /// Stable code used in logs and on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NoSuchColor(_) => "NoSuchColor",
            Self::NothingToJumpBackTo => "NothingToJumpBackTo",
            Self::ScanBusy => "ScanBusy",
            Self::UnknownSheet(_) => "UnknownSheet",
            Self::OutOfBounds(_) => "OutOfBounds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub technology: CommandSet,
    pub dwell_ms: u32,
    /// Scans stop by themselves on a cell unlike the one before it.
    pub smart_scan: bool,
    pub viewport_rows: u32,
    pub viewport_cols: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            technology: CommandSet::IVoice,
            dwell_ms: 1000,
            smart_scan: false,
            viewport_rows: 31,
            viewport_cols: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NavSession {
    workbook: Arc<Workbook>,
    cursor: CellAddress,
    viewport: Viewport,
    jump_stack: Vec<CellAddress>,
    color_map: ColorMap,
    legend_visible: bool,
    scan: ScanState,
    dwell_ms: u32,
    error_marks: BTreeSet<CellAddress>,
    // per-sheet cursor and viewport origin, restored when a tab is revisited
    sheet_memory: HashMap<String, (CellAddress, u32, u32)>,
}

impl NavSession {
    /// New session with the cursor on A1 of the first sheet.
    pub fn new(workbook: Arc<Workbook>, config: &SessionConfig) -> Self {
        let sheet = workbook.sheets()[0].name().to_string();
        let cursor = CellAddress::new(sheet.clone(), 1, 1);
        let viewport = Viewport::new(sheet, config.viewport_rows.max(1), config.viewport_cols.max(1));
        let mut session = Self {
            workbook,
            cursor,
            viewport,
            jump_stack: Vec::new(),
            color_map: ColorMap::default(),
            legend_visible: false,
            scan: ScanState::Idle,
            dwell_ms: config.dwell_ms.clamp(MIN_DWELL_MS, MAX_DWELL_MS),
            error_marks: BTreeSet::new(),
            sheet_memory: HashMap::new(),
        };
        session.refresh_colors();
        session
    }

    /// Events that open a session: entering the starting cell.
    pub fn opening_events(&self, t: u64) -> Vec<ActivityEvent> {
        let mut events = vec![ActivityEvent::enter(t, self.cursor.clone())];
        let (_, diag) = color::reference_colors(&self.workbook, &self.cursor, &self.viewport);
        if let Some(d) = diag {
            events.push(self.event(t, EventKind::Diagnostic, Some(d)));
        }
        events
    }

    pub fn workbook(&self) -> &Workbook {
        &self.workbook
    }

    pub fn cursor(&self) -> &CellAddress {
        &self.cursor
    }

    pub fn viewport(&self) -> &Viewport {
        &self.viewport
    }

    pub fn jump_stack(&self) -> &[CellAddress] {
        &self.jump_stack
    }

    pub fn color_map(&self) -> &ColorMap {
        &self.color_map
    }

    pub fn legend_visible(&self) -> bool {
        self.legend_visible
    }

    pub fn scan(&self) -> &ScanState {
        &self.scan
    }

    pub fn dwell_ms(&self) -> u32 {
        self.dwell_ms
    }

    pub fn error_marks(&self) -> &BTreeSet<CellAddress> {
        &self.error_marks
    }

    fn event(&self, t: u64, kind: EventKind, payload: Option<String>) -> ActivityEvent {
        ActivityEvent::new(t, kind, Some(self.cursor.clone()), payload)
    }

    fn refresh_colors(&mut self) -> Option<String> {
        let (map, diag) = color::reference_colors(&self.workbook, &self.cursor, &self.viewport);
        self.color_map = map;
        diag
    }

    /// Recompute the shortcut colours for the formula under the cursor.
    pub fn compute_reference_colors(&self) -> ColorMap {
        color::reference_colors(&self.workbook, &self.cursor, &self.viewport).0
    }

    fn resolve(&self, target: &CellAddress) -> Result<CellAddress, NavError> {
        if self.workbook.sheet(&target.sheet).is_none() {
            return Err(NavError::UnknownSheet(target.sheet.clone()));
        }
        self.workbook
            .canonical(target)
            .ok_or_else(|| NavError::OutOfBounds(target.to_string()))
    }

    fn move_cursor(&mut self, target: CellAddress, t: u64) -> Vec<ActivityEvent> {
        let mut events = vec![
            ActivityEvent::leave(t, self.cursor.clone()),
            ActivityEvent::enter(t, target.clone()),
        ];
        if target.sheet != self.cursor.sheet {
            self.sheet_memory.insert(
                self.cursor.sheet.clone(),
                (self.cursor.clone(), self.viewport.top, self.viewport.left),
            );
            let (top, left) = self
                .sheet_memory
                .get(&target.sheet)
                .map_or((1, 1), |(_, top, left)| (*top, *left));
            self.viewport.sheet = target.sheet.clone();
            self.viewport.top = top;
            self.viewport.left = left;
        }
        self.viewport.scroll_to(target.col, target.row);
        self.cursor = target;
        if let Some(diag) = self.refresh_colors() {
            events.push(self.event(t, EventKind::Diagnostic, Some(diag)));
        }
        events
    }

    /// Explicit navigation ends a running scan.
    fn preempt_scan(&mut self, t: u64) -> Vec<ActivityEvent> {
        if self.scan.is_active() {
            self.scan = ScanState::Idle;
            vec![self.event(t, EventKind::ScanStop, Some("preempted".into()))]
        } else {
            Vec::new()
        }
    }

    pub fn select(&mut self, target: &CellAddress, t: u64) -> Result<Vec<ActivityEvent>, NavError> {
        let target = self.resolve(target)?;
        let mut events = self.preempt_scan(t);
        events.extend(self.move_cursor(target, t));
        Ok(events)
    }

    /// Follow a colour shortcut, remembering where we came from.
    pub fn jump_color(&mut self, color: ColorName, t: u64) -> Result<Vec<ActivityEvent>, NavError> {
        let target = self
            .color_map
            .get(color)
            .ok_or(NavError::NoSuchColor(color))?
            .target
            .clone();
        let mut events = self.preempt_scan(t);
        self.jump_stack.push(self.cursor.clone());
        events.extend(self.move_cursor(target, t));
        Ok(events)
    }

    pub fn jump_back(&mut self, t: u64) -> Result<Vec<ActivityEvent>, NavError> {
        let target = self.jump_stack.pop().ok_or(NavError::NothingToJumpBackTo)?;
        let mut events = self.preempt_scan(t);
        events.extend(self.move_cursor(target, t));
        Ok(events)
    }

    pub fn toggle_legend(&mut self, show: bool) -> Vec<ActivityEvent> {
        self.legend_visible = show;
        Vec::new()
    }

    fn boundary(&self, t: u64, direction: Direction) -> ActivityEvent {
        self.event(t, EventKind::BoundaryReached, Some(direction.to_string()))
    }

    /// Move to the next non-blank cell in `direction`. With none left inside
    /// the used range, stop on the used-range edge and report the boundary.
    pub fn jump_blank(&mut self, direction: Direction, t: u64) -> Vec<ActivityEvent> {
        let mut events = self.preempt_scan(t);
        let sheet = self.workbook.sheet(&self.cursor.sheet).expect("cursor sheet exists");
        let Some(used) = sheet.used_range() else {
            events.push(self.boundary(t, direction));
            return events;
        };
        let (col, row) = (self.cursor.col, self.cursor.row);
        let found = match direction {
            Direction::Right => (col + 1..=used.max_col).find(|&c| !sheet.get(c, row).is_blank()).map(|c| (c, row)),
            Direction::Left => (used.min_col..col).rev().find(|&c| !sheet.get(c, row).is_blank()).map(|c| (c, row)),
            Direction::Down => (row + 1..=used.max_row).find(|&r| !sheet.get(col, r).is_blank()).map(|r| (col, r)),
            Direction::Up => (used.min_row..row).rev().find(|&r| !sheet.get(col, r).is_blank()).map(|r| (col, r)),
        };
        if let Some((c, r)) = found {
            let target = self.cursor.with_pos(c, r);
            events.extend(self.move_cursor(target, t));
            return events;
        }
        let edge = match direction {
            Direction::Right => (used.max_col > col).then_some((used.max_col, row)),
            Direction::Left => (used.min_col < col).then_some((used.min_col, row)),
            Direction::Down => (used.max_row > row).then_some((col, used.max_row)),
            Direction::Up => (used.min_row < row).then_some((col, used.min_row)),
        };
        if let Some((c, r)) = edge {
            let target = self.cursor.with_pos(c, r);
            events.extend(self.move_cursor(target, t));
        }
        events.push(self.boundary(t, direction));
        events
    }

    pub fn set_error_mark(
        &mut self,
        addr: &CellAddress,
        marked: bool,
        t: u64,
    ) -> Result<Vec<ActivityEvent>, NavError> {
        let addr = self.resolve(addr)?;
        let kind = if marked {
            self.error_marks.insert(addr.clone());
            EventKind::MarkError
        } else {
            self.error_marks.remove(&addr);
            EventKind::UnmarkError
        };
        Ok(vec![ActivityEvent::new(t, kind, Some(addr), None)])
    }

    /// Baseline `go to cell`: a cell on the current sheet.
    pub fn go_to(&mut self, a1: &str, t: u64) -> Result<Vec<ActivityEvent>, NavError> {
        let target = CellAddress::on_sheet(&self.cursor.sheet, a1)
            .map_err(|_| NavError::OutOfBounds(a1.to_string()))?;
        self.select(&target, t)
    }

    /// Baseline `move <direction> <n>`, clamped to the sheet.
    pub fn move_by(&mut self, direction: Direction, n: u32, t: u64) -> Vec<ActivityEvent> {
        let mut events = self.preempt_scan(t);
        let (col, row) = (self.cursor.col, self.cursor.row);
        let (dc, dr) = direction.delta();
        let c = (i64::from(col) + dc * i64::from(n)).clamp(1, i64::from(MAX_COL)) as u32;
        let r = (i64::from(row) + dr * i64::from(n)).clamp(1, i64::from(MAX_ROW)) as u32;
        if (c, r) == (col, row) {
            events.push(self.boundary(t, direction));
        } else {
            let target = self.cursor.with_pos(c, r);
            events.extend(self.move_cursor(target, t));
        }
        events
    }

    /// Baseline `next worksheet` (`+1`) / `previous worksheet` (`-1`): the
    /// sheet's last cursor position is restored.
    pub fn switch_sheet(&mut self, forward: bool, t: u64) -> Vec<ActivityEvent> {
        let mut events = self.preempt_scan(t);
        let index = self.workbook.sheet_index(&self.cursor.sheet).expect("cursor sheet exists");
        let next = if forward { index.checked_add(1) } else { index.checked_sub(1) };
        match next.and_then(|i| self.workbook.sheets().get(i)) {
            Some(sheet) => {
                let target = self
                    .sheet_memory
                    .get(sheet.name())
                    .map(|(c, _, _)| c.clone())
                    .unwrap_or_else(|| CellAddress::new(sheet.name(), 1, 1));
                events.extend(self.move_cursor(target, t));
            }
            None => events.push(self.event(
                t,
                EventKind::BoundaryReached,
                Some(if forward { "next" } else { "previous" }.into()),
            )),
        }
        events
    }

    /// Baseline `press control <arrow>` with conventional run-end semantics:
    /// inside a filled run go to its last cell, otherwise to the next filled
    /// cell, otherwise to the sheet edge.
    pub fn ctrl_arrow(&mut self, direction: Direction, t: u64) -> Vec<ActivityEvent> {
        let mut events = self.preempt_scan(t);
        let sheet = self.workbook.sheet(&self.cursor.sheet).expect("cursor sheet exists");
        let (col, row) = (self.cursor.col, self.cursor.row);
        let filled = |(c, r): (u32, u32)| !sheet.get(c, r).is_blank();
        let Some(first) = direction.step(col, row, 1) else {
            events.push(self.boundary(t, direction));
            return events;
        };
        let target = if filled((col, row)) && filled(first) {
            let mut at = first;
            while let Some(next) = direction.step(at.0, at.1, 1).filter(|&p| filled(p)) {
                at = next;
            }
            at
        } else {
            let used = sheet.used_range();
            let mut at = first;
            loop {
                if filled(at) {
                    break at;
                }
                let outside = used.is_none_or(|u| match direction {
                    Direction::Right => at.0 >= u.max_col,
                    Direction::Left => at.0 <= u.min_col,
                    Direction::Down => at.1 >= u.max_row,
                    Direction::Up => at.1 <= u.min_row,
                });
                if outside {
                    break match direction {
                        Direction::Right => (MAX_COL, row),
                        Direction::Left => (1, row),
                        Direction::Down => (col, MAX_ROW),
                        Direction::Up => (col, 1),
                    };
                }
                at = direction.step(at.0, at.1, 1).expect("inside used range");
            }
        };
        let target = self.cursor.with_pos(target.0, target.1);
        events.extend(self.move_cursor(target, t));
        events
    }
}
