use super::{Direction, NavError, NavSession};
use crate::formula::{shape_of, similar};
use crate::tcat::{ActivityEvent, EventKind};

pub const MIN_DWELL_MS: u32 = 250;
pub const MAX_DWELL_MS: u32 = 5000;
pub const DWELL_STEP_MS: u32 = 250;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanState {
    Idle,
    Active {
        direction: Direction,
        smart: bool,
        /// Time of the last advance, or of the scan start before the first.
        last_advance_t: u64,
    },
}

impl ScanState {
    pub fn is_active(&self) -> bool {
        matches!(self, Self::Active { .. })
    }
}

impl NavSession {
    pub fn scan_start(
        &mut self,
        direction: Direction,
        smart: bool,
        t: u64,
    ) -> Result<Vec<ActivityEvent>, NavError> {
        if self.scan.is_active() {
            return Err(NavError::ScanBusy);
        }
        self.scan = ScanState::Active {
            direction,
            smart,
            last_advance_t: t,
        };
        Ok(vec![self.event(t, EventKind::ScanStart, Some(direction.to_string()))])
    }

    /// Advance the scan for every dwell period that has fully elapsed by
    /// `now`. Each advance is stamped with its scheduled time, so the result
    /// does not depend on how often the clock ticks.
    pub fn scan_tick(&mut self, now: u64) -> Vec<ActivityEvent> {
        let mut events = Vec::new();
        while let ScanState::Active {
            direction,
            smart,
            last_advance_t,
        } = self.scan
        {
            let due = last_advance_t + u64::from(self.dwell_ms);
            if now < due {
                break;
            }
            let used = self
                .workbook
                .sheet(&self.cursor.sheet)
                .and_then(|s| s.used_range());
            let next = direction
                .step(self.cursor.col, self.cursor.row, 1)
                .filter(|&(c, r)| used.is_some_and(|u| u.contains(c, r)));
            let Some((col, row)) = next else {
                self.scan = ScanState::Idle;
                events.push(self.event(due, EventKind::ScanEnded, Some(direction.to_string())));
                break;
            };
            let before = shape_of(self.workbook.content(&self.cursor), &self.cursor);
            let target = self.cursor.with_pos(col, row);
            events.extend(self.move_cursor(target, due));
            self.scan = ScanState::Active {
                direction,
                smart,
                last_advance_t: due,
            };
            if smart {
                let after = shape_of(self.workbook.content(&self.cursor), &self.cursor);
                if !similar(&before, &after) {
                    self.scan = ScanState::Idle;
                    events.push(self.event(due, EventKind::ScanAutoStopped, Some(direction.to_string())));
                }
            }
        }
        events
    }

    pub fn scan_stop(&mut self, t: u64) -> Vec<ActivityEvent> {
        if !self.scan.is_active() {
            return Vec::new();
        }
        self.scan = ScanState::Idle;
        vec![self.event(t, EventKind::ScanStop, None)]
    }

    /// Shorten (negative steps) or lengthen the dwell by 250 ms per step,
    /// clamped to 250..=5000 ms. A running scan picks up the new value; if
    /// that makes its next step overdue, the step is taken at `t`.
    pub fn adjust_dwell(&mut self, delta_steps: i32, t: u64) -> u32 {
        let next = i64::from(self.dwell_ms) + i64::from(delta_steps) * i64::from(DWELL_STEP_MS);
        self.dwell_ms = next.clamp(i64::from(MIN_DWELL_MS), i64::from(MAX_DWELL_MS)) as u32;
        if let ScanState::Active { last_advance_t, .. } = &mut self.scan {
            let dwell = u64::from(self.dwell_ms);
            if *last_advance_t + dwell < t {
                *last_advance_t = t - dwell;
            }
        }
        self.dwell_ms
    }
}
