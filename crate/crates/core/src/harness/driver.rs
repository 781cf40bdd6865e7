//! One ordered command-and-tick queue in front of a [`NavSession`].
//!
//! Every front end (terminal loop, socket service, replay) goes through a
//! [`Driver`], so the same commands at the same timestamps always produce the
//! same log. Before a command at time `t` the scan clock is advanced to `t`,
//! so scan steps due at or before `t` are logged ahead of the command.

use std::sync::Arc;

use crate::commands::{interpret, CommandSet, ParsedCommand};
use crate::navengine::{NavError, NavSession, SessionConfig};
use crate::tcat::{ActivityEvent, EventKind, EventLog, LogHeader};
use crate::workbook::Workbook;

/// Why a command had no effect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandFailure {
    /// Stable code: `UnknownCommand` or one of the engine's error codes.
    pub code: &'static str,
    pub message: String,
}

impl From<NavError> for CommandFailure {
    fn from(e: NavError) -> Self {
        Self {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Everything logged while handling the command, including scan steps
    /// that fell due first.
    pub events: Vec<ActivityEvent>,
    pub error: Option<CommandFailure>,
}

#[derive(Debug, Clone)]
pub struct Driver {
    session: NavSession,
    log: EventLog,
    technology: CommandSet,
    smart_scan: bool,
}

impl Driver {
    /// Starts the session at t = 0 on A1 of the first sheet.
    pub fn new(workbook: Workbook, session_id: String, config: SessionConfig) -> Self {
        let mut log = EventLog::new(LogHeader::new(session_id, &workbook, &config));
        let session = NavSession::new(Arc::new(workbook), &config);
        for e in session.opening_events(0) {
            log.record(e).expect("first events");
        }
        Self {
            session,
            log,
            technology: config.technology,
            smart_scan: config.smart_scan,
        }
    }

    pub fn session(&self) -> &NavSession {
        &self.session
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_session(self) -> NavSession {
        self.session
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Timestamps never run backwards: an earlier `t` is treated as the
    /// latest logged time.
    fn clamp(&self, t: u64) -> u64 {
        self.log.last_t().map_or(t, |last| t.max(last))
    }

    fn record(&mut self, events: Vec<ActivityEvent>, into: &mut Vec<ActivityEvent>) {
        for e in events {
            self.log.record(e.clone()).expect("clamped timestamps");
            into.push(e);
        }
    }

    /// Advance a running scan to `now`.
    pub fn tick(&mut self, now: u64) -> Vec<ActivityEvent> {
        let now = self.clamp(now);
        let events = self.session.scan_tick(now);
        let mut out = Vec::new();
        self.record(events, &mut out);
        out
    }

    pub fn command(&mut self, text: &str, t: u64) -> Outcome {
        let mut events = self.tick(t);
        let t = self.clamp(t);
        let issued = ActivityEvent::new(
            t,
            EventKind::CommandIssued,
            Some(self.session.cursor().clone()),
            Some(text.to_string()),
        );
        self.record(vec![issued], &mut events);
        let result = match interpret(text, self.technology) {
            Ok(cmd) => self.apply(&cmd, t),
            Err(e) => Err(CommandFailure {
                code: "UnknownCommand",
                message: e.to_string(),
            }),
        };
        let error = match result {
            Ok(produced) => {
                self.record(produced, &mut events);
                None
            }
            Err(failure) => {
                let diag = ActivityEvent::new(
                    t,
                    EventKind::Diagnostic,
                    Some(self.session.cursor().clone()),
                    Some(format!("{}: {}", failure.code, failure.message)),
                );
                self.record(vec![diag], &mut events);
                Some(failure)
            }
        };
        Outcome { events, error }
    }

    fn apply(&mut self, cmd: &ParsedCommand, t: u64) -> Result<Vec<ActivityEvent>, CommandFailure> {
        use ParsedCommand::*;
        let s = &mut self.session;
        Ok(match cmd {
            JumpColor(c) => s.jump_color(*c, t)?,
            JumpBack => s.jump_back(t)?,
            JumpBlank(d) => s.jump_blank(*d, t),
            ScanStart(d) => s.scan_start(*d, self.smart_scan, t)?,
            ScanStop => s.scan_stop(t),
            ShowColors => s.toggle_legend(true),
            HideColors => s.toggle_legend(false),
            SpeedUp => {
                s.adjust_dwell(-1, t);
                Vec::new()
            }
            SlowDown => {
                s.adjust_dwell(1, t);
                Vec::new()
            }
            MarkError | UnmarkError => {
                let here = s.cursor().clone();
                s.set_error_mark(&here, matches!(cmd, MarkError), t)?
            }
            GoToCell(a1) => s.go_to(a1, t)?,
            Move(d, n) => s.move_by(*d, *n, t),
            NextWorksheet => s.switch_sheet(true, t),
            PrevWorksheet => s.switch_sheet(false, t),
            PressCtrlArrow(d) => s.ctrl_arrow(*d, t),
        })
    }
}
