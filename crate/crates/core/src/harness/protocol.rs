//! JSON message protocol for live sessions, one message per frame.
//!
//! Client to server:
//!
//! ```text
//! {"type":"command","text":"jump green","t":12345}
//! {"type":"load"}
//! {"type":"end"}
//! ```
//!
//! Server to client: `event` (an activity event in log line form), `state`
//! (a snapshot, sent after every command and after scan steps), `workbook`
//! (cell display text, sent in reply to `load`), `error`, and `ended`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::driver::Driver;
use crate::navengine::{NavSession, ScanState};
use crate::tcat::{ActivityEvent, WireEvent};
use crate::workbook::{format_a1, Workbook};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Command {
        text: String,
        /// Milliseconds since session start; the server clock is used when
        /// absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<u64>,
    },
    Load,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorChip {
    pub c: String,
    pub cell: String,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewportInfo {
    pub sheet: String,
    pub top: u32,
    pub left: u32,
    pub rows: u32,
    pub cols: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub cursor: String,
    pub colors: Vec<ColorChip>,
    pub legend: bool,
    pub dwell_ms: u32,
    pub marks: Vec<String>,
    pub viewport: ViewportInfo,
    /// Direction of the running scan.
    pub scan: Option<String>,
}

impl StateSnapshot {
    pub fn of(session: &NavSession) -> Self {
        let vp = session.viewport();
        Self {
            cursor: session.cursor().to_string(),
            colors: session
                .color_map()
                .entries()
                .iter()
                .map(|e| ColorChip {
                    c: e.color.to_string(),
                    cell: e.target.to_string(),
                    visible: e.visible,
                })
                .collect(),
            legend: session.legend_visible(),
            dwell_ms: session.dwell_ms(),
            marks: session.error_marks().iter().map(ToString::to_string).collect(),
            viewport: ViewportInfo {
                sheet: vp.sheet.clone(),
                top: vp.top,
                left: vp.left,
                rows: vp.rows,
                cols: vp.cols,
            },
            scan: match session.scan() {
                ScanState::Active { direction, .. } => Some(direction.to_string()),
                ScanState::Idle => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetView {
    pub name: String,
    /// A1 address to display text.
    pub cells: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Event(WireEvent),
    State(StateSnapshot),
    Workbook { sheets: Vec<SheetView> },
    Error {
        code: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        message: Option<String>,
    },
    Ended {
        /// Where the log was written, if it was.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log: Option<String>,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }

    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Self::Error {
            code: code.to_string(),
            message: Some(message.into()),
        }
    }
}

pub fn workbook_view(workbook: &Workbook) -> Vec<SheetView> {
    workbook
        .sheets()
        .iter()
        .map(|s| SheetView {
            name: s.name().to_string(),
            cells: s
                .cells()
                .map(|(c, r, content)| (format_a1(c, r), content.display()))
                .collect(),
        })
        .collect()
}

/// What the transport should do after a client frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub messages: Vec<ServerMessage>,
    /// The client asked to end the session; persist the log and send
    /// [`ServerMessage::Ended`].
    pub end: bool,
}

/// Protocol state for one connection.
#[derive(Debug)]
pub struct Connection {
    driver: Driver,
}

impl Connection {
    pub fn new(driver: Driver) -> Self {
        Self { driver }
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn into_driver(self) -> Driver {
        self.driver
    }

    pub fn state(&self) -> ServerMessage {
        ServerMessage::State(StateSnapshot::of(self.driver.session()))
    }

    fn events(events: &[ActivityEvent]) -> impl Iterator<Item = ServerMessage> + '_ {
        events.iter().map(|e| ServerMessage::Event(e.to_wire()))
    }

    /// Handle one text frame received at server time `now`. Malformed frames
    /// get an error reply and leave the session untouched.
    pub fn handle(&mut self, frame: &str, now: u64) -> Reply {
        let msg: ClientMessage = match serde_json::from_str(frame) {
            Ok(m) => m,
            Err(e) => {
                return Reply {
                    messages: vec![ServerMessage::error("MalformedMessage", e.to_string())],
                    end: false,
                }
            }
        };
        match msg {
            ClientMessage::Command { text, t } => {
                let outcome = self.driver.command(&text, t.unwrap_or(now));
                let mut messages: Vec<ServerMessage> = Self::events(&outcome.events).collect();
                if let Some(f) = outcome.error {
                    messages.push(ServerMessage::error(f.code, f.message));
                }
                messages.push(self.state());
                Reply { messages, end: false }
            }
            ClientMessage::Load => Reply {
                messages: vec![
                    ServerMessage::Workbook {
                        sheets: workbook_view(self.driver.session().workbook()),
                    },
                    self.state(),
                ],
                end: false,
            },
            ClientMessage::End => Reply {
                messages: Vec::new(),
                end: true,
            },
        }
    }

    /// Scan clock tick; replies only when something happened.
    pub fn tick(&mut self, now: u64) -> Vec<ServerMessage> {
        let events = self.driver.tick(now);
        if events.is_empty() {
            return Vec::new();
        }
        let mut messages: Vec<ServerMessage> = Self::events(&events).collect();
        messages.push(self.state());
        messages
    }
}
