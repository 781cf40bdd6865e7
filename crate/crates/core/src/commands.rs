//! Text command vocabulary for the two command sets.
//!
//! Input is a recognized utterance as plain text. Matching ignores case,
//! repeated whitespace and trailing full stops.
//!
//! | Phrase                                   | Set      | Command          |
//! |------------------------------------------|----------|------------------|
//! | `jump <colour>`                          | iVoice   | `JumpColor`      |
//! | `jump back`                              | iVoice   | `JumpBack`       |
//! | `jump <up/down/left/right>`              | iVoice   | `JumpBlank`      |
//! | `scan <direction>`                       | iVoice   | `ScanStart`      |
//! | `stop`, `stop scan`, `stop scanning`     | iVoice   | `ScanStop`       |
//! | `show colours`/`show colors`             | iVoice   | `ShowColors`     |
//! | `hide colours`/`hide colors`             | iVoice   | `HideColors`     |
//! | `speed up`, `slow down`                  | iVoice   | dwell adjustment |
//! | `mark error`, `unmark error`             | both     | error marks      |
//! | `go to cell <A1>`, `move to cell <A1>`   | baseline | `GoToCell`       |
//! | `move <direction> [n] [cells]`           | baseline | `Move`           |
//! | `next worksheet`, `previous worksheet`   | baseline | sheet tabs       |
//! | `press control <direction> [arrow]`      | baseline | `PressCtrlArrow` |
//!
//! Colours are `blue green pink red lime orange purple`. Counts may be digits
//! or the words `one` to `twenty`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::navengine::{ColorName, Direction};
use crate::workbook::{format_a1, parse_a1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandSet {
    IVoice,
    Baseline,
}

impl fmt::Display for CommandSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IVoice => "ivoice",
            Self::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParsedCommand {
    JumpColor(ColorName),
    JumpBack,
    JumpBlank(Direction),
    ScanStart(Direction),
    ScanStop,
    ShowColors,
    HideColors,
    SpeedUp,
    SlowDown,
    MarkError,
    UnmarkError,
    /// Canonical A1 text of the target on the current sheet.
    GoToCell(String),
    Move(Direction, u32),
    NextWorksheet,
    PrevWorksheet,
    PressCtrlArrow(Direction),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
}

impl ParsedCommand {
    pub fn available_in(&self, set: CommandSet) -> bool {
        use ParsedCommand::*;
        match self {
            MarkError | UnmarkError => true,
            JumpColor(_) | JumpBack | JumpBlank(_) | ScanStart(_) | ScanStop | ShowColors
            | HideColors | SpeedUp | SlowDown => set == CommandSet::IVoice,
            GoToCell(_) | Move(..) | NextWorksheet | PrevWorksheet | PressCtrlArrow(_) => {
                set == CommandSet::Baseline
            }
        }
    }

    /// A phrase that `interpret` maps back to this command.
    pub fn canonical_text(&self) -> String {
        use ParsedCommand::*;
        match self {
            JumpColor(c) => format!("jump {c}"),
            JumpBack => "jump back".into(),
            JumpBlank(d) => format!("jump {d}"),
            ScanStart(d) => format!("scan {d}"),
            ScanStop => "stop".into(),
            ShowColors => "show colours".into(),
            HideColors => "hide colours".into(),
            SpeedUp => "speed up".into(),
            SlowDown => "slow down".into(),
            MarkError => "mark error".into(),
            UnmarkError => "unmark error".into(),
            GoToCell(a1) => format!("go to cell {a1}"),
            Move(d, n) => format!("move {d} {n}"),
            NextWorksheet => "next worksheet".into(),
            PrevWorksheet => "previous worksheet".into(),
            PressCtrlArrow(d) => format!("press control {d}"),
        }
    }

    /// Commands that move the cursor by explicit navigation.
    pub fn navigates(&self) -> bool {
        use ParsedCommand::*;
        matches!(
            self,
            JumpColor(_) | JumpBack | JumpBlank(_) | GoToCell(_) | Move(..) | NextWorksheet
                | PrevWorksheet | PressCtrlArrow(_)
        )
    }
}

impl fmt::Display for ParsedCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

const NUMBER_WORDS: [&str; 20] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty",
];

fn count(word: &str) -> Option<u32> {
    if let Ok(n) = word.parse::<u32>() {
        return (n >= 1).then_some(n);
    }
    NUMBER_WORDS.iter().position(|w| *w == word).map(|i| i as u32 + 1)
}

fn cell_text(word: &str) -> Option<String> {
    parse_a1(word).ok().map(|(c, r)| format_a1(c, r))
}

fn interpret_ivoice(words: &[&str]) -> Option<ParsedCommand> {
    use ParsedCommand::*;
    Some(match words {
        ["jump", "back"] => JumpBack,
        ["jump", w] => match w.parse::<ColorName>() {
            Ok(c) => JumpColor(c),
            Err(_) => JumpBlank(w.parse().ok()?),
        },
        ["scan", d] => ScanStart(d.parse().ok()?),
        ["stop"] | ["stop", "scan" | "scanning"] => ScanStop,
        ["show", "colours" | "colors"] => ShowColors,
        ["hide", "colours" | "colors"] => HideColors,
        ["speed", "up"] => SpeedUp,
        ["slow", "down"] => SlowDown,
        _ => return None,
    })
}

fn interpret_baseline(words: &[&str]) -> Option<ParsedCommand> {
    use ParsedCommand::*;
    Some(match words {
        ["go" | "move", "to", "cell", a1] => GoToCell(cell_text(a1)?),
        ["move", d] => Move(d.parse().ok()?, 1),
        ["move", d, n] | ["move", d, n, "cell" | "cells"] => Move(d.parse().ok()?, count(n)?),
        ["next", "worksheet" | "sheet"] => NextWorksheet,
        ["previous", "worksheet" | "sheet"] => PrevWorksheet,
        ["press", "control" | "ctrl", d] | ["press", "control" | "ctrl", d, "arrow"] => {
            PressCtrlArrow(d.parse().ok()?)
        }
        _ => return None,
    })
}

/// Map an utterance onto a command of the given set.
pub fn interpret(text: &str, set: CommandSet) -> Result<ParsedCommand, CommandError> {
    let lowered = text.trim().trim_end_matches('.').to_lowercase();
    let words: Vec<&str> = lowered.split_whitespace().collect();
    let shared = match words.as_slice() {
        ["mark", "error"] => Some(ParsedCommand::MarkError),
        ["unmark", "error"] => Some(ParsedCommand::UnmarkError),
        _ => None,
    };
    let parsed = shared.or_else(|| match set {
        CommandSet::IVoice => interpret_ivoice(&words),
        CommandSet::Baseline => interpret_baseline(&words),
    });
    parsed.ok_or_else(|| CommandError::UnknownCommand(text.to_string()))
}

pub fn command_count(script: &[ParsedCommand]) -> usize {
    script.len()
}

/// Commands needed to reach a referenced cell on another worksheet: the
/// baseline set walks the tabs one at a time and then names the cell, the
/// iVoice set uses the reference's colour shortcut.
pub fn reference_check_script(
    set: CommandSet,
    from_tab: usize,
    to_tab: usize,
    color: ColorName,
    target_a1: &str,
) -> Vec<ParsedCommand> {
    match set {
        CommandSet::IVoice => vec![ParsedCommand::JumpColor(color)],
        CommandSet::Baseline => {
            let step = if to_tab >= from_tab {
                ParsedCommand::NextWorksheet
            } else {
                ParsedCommand::PrevWorksheet
            };
            let mut script = vec![step; from_tab.abs_diff(to_tab)];
            script.push(ParsedCommand::GoToCell(target_a1.to_string()));
            script
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CommandSet::*;

    #[test]
    fn examples() {
        assert_eq!(interpret("Jump Green", IVoice).unwrap(), ParsedCommand::JumpColor(ColorName::Green));
        assert_eq!(interpret("scan down", IVoice).unwrap(), ParsedCommand::ScanStart(Direction::Down));
        assert_eq!(
            interpret("go to cell B5", Baseline).unwrap(),
            ParsedCommand::GoToCell("B5".into())
        );
        assert_eq!(
            interpret("  Move   to cell  aa10. ", Baseline).unwrap(),
            ParsedCommand::GoToCell("AA10".into())
        );
    }

    #[test]
    fn jump_word_disambiguation() {
        assert_eq!(interpret("jump back", IVoice).unwrap(), ParsedCommand::JumpBack);
        assert_eq!(interpret("jump left", IVoice).unwrap(), ParsedCommand::JumpBlank(Direction::Left));
        assert_eq!(interpret("JUMP PURPLE", IVoice).unwrap(), ParsedCommand::JumpColor(ColorName::Purple));
        assert!(interpret("jump magenta", IVoice).is_err());
    }

    #[test]
    fn sets_are_disjoint_except_marks() {
        assert!(interpret("jump green", Baseline).is_err());
        assert!(interpret("scan up", Baseline).is_err());
        assert!(interpret("next worksheet", IVoice).is_err());
        assert!(interpret("go to cell A1", IVoice).is_err());
        assert_eq!(interpret("Mark Error", IVoice).unwrap(), ParsedCommand::MarkError);
        assert_eq!(interpret("unmark error", Baseline).unwrap(), ParsedCommand::UnmarkError);
    }

    #[test]
    fn baseline_moves() {
        assert_eq!(interpret("move down", Baseline).unwrap(), ParsedCommand::Move(Direction::Down, 1));
        assert_eq!(
            interpret("move right three cells", Baseline).unwrap(),
            ParsedCommand::Move(Direction::Right, 3)
        );
        assert_eq!(interpret("move up 12", Baseline).unwrap(), ParsedCommand::Move(Direction::Up, 12));
        assert!(interpret("move up 0", Baseline).is_err());
        assert_eq!(
            interpret("press control down arrow", Baseline).unwrap(),
            ParsedCommand::PressCtrlArrow(Direction::Down)
        );
    }

    #[test]
    fn garbage_rejected() {
        for text in ["", "jump", "scan", "scan diagonal", "go to cell", "go to cell A0", "hello"] {
            assert!(matches!(interpret(text, IVoice), Err(CommandError::UnknownCommand(_))), "{text}");
            assert!(interpret(text, Baseline).is_err(), "{text}");
        }
    }

    #[test]
    fn counting() {
        assert_eq!(command_count(&[]), 0);
        let script = [ParsedCommand::JumpBack, ParsedCommand::ScanStop, ParsedCommand::MarkError];
        assert_eq!(command_count(&script), 3);
    }

    #[test]
    fn reference_check_scripts() {
        for k in 0..5usize {
            let baseline = reference_check_script(Baseline, 0, k + 1, ColorName::Pink, "D6");
            let nexts = baseline.iter().filter(|c| **c == ParsedCommand::NextWorksheet).count();
            assert_eq!(nexts, k + 1);
            assert_eq!(command_count(&baseline), k + 2);
            let ivoice = reference_check_script(IVoice, 0, k + 1, ColorName::Pink, "D6");
            assert_eq!(ivoice, vec![ParsedCommand::JumpColor(ColorName::Pink)]);
        }
        let back = reference_check_script(Baseline, 2, 0, ColorName::Blue, "A1");
        assert_eq!(back[0], ParsedCommand::PrevWorksheet);
    }

    fn arb_command() -> impl Strategy<Value = ParsedCommand> {
        let dir = prop_oneof![
            Just(Direction::Up),
            Just(Direction::Down),
            Just(Direction::Left),
            Just(Direction::Right)
        ];
        let color = (0usize..7).prop_map(|i| ColorName::PALETTE[i]);
        prop_oneof![
            color.prop_map(ParsedCommand::JumpColor),
            Just(ParsedCommand::JumpBack),
            dir.clone().prop_map(ParsedCommand::JumpBlank),
            dir.clone().prop_map(ParsedCommand::ScanStart),
            Just(ParsedCommand::ScanStop),
            Just(ParsedCommand::ShowColors),
            Just(ParsedCommand::HideColors),
            Just(ParsedCommand::SpeedUp),
            Just(ParsedCommand::SlowDown),
            Just(ParsedCommand::MarkError),
            Just(ParsedCommand::UnmarkError),
            (1u32..500, 1u32..5000).prop_map(|(c, r)| ParsedCommand::GoToCell(format_a1(c, r))),
            (dir.clone(), 1u32..100).prop_map(|(d, n)| ParsedCommand::Move(d, n)),
            Just(ParsedCommand::NextWorksheet),
            Just(ParsedCommand::PrevWorksheet),
            dir.prop_map(ParsedCommand::PressCtrlArrow),
        ]
    }

    proptest! {
        #[test]
        fn canonical_text_round_trips(cmd in arb_command()) {
            let set = if cmd.available_in(IVoice) { IVoice } else { Baseline };
            prop_assert_eq!(interpret(&cmd.canonical_text(), set).unwrap(), cmd.clone());
            prop_assert_eq!(interpret(&cmd.canonical_text().to_uppercase(), set).unwrap(), cmd);
        }
    }
}
