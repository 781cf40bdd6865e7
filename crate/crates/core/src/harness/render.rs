//! Plain-text rendering of a session for the terminal loop.

use std::fmt::Write;

use crate::navengine::{is_visible, NavSession, ScanState};
use crate::workbook::{col_to_letters, CellAddress};

const CELL_WIDTH: usize = 10;

fn fit(text: &str, width: usize) -> String {
    let mut s: String = text.chars().take(width).collect();
    while s.chars().count() < width {
        s.push(' ');
    }
    s
}

/// The viewport as a grid. Reference targets carry their colour tag, the
/// cursor cell is bracketed and marked cells end in `!`. Targets outside the
/// viewport are listed under the grid.
pub fn render(session: &NavSession) -> String {
    let vp = session.viewport();
    let wb = session.workbook();
    let mut out = String::new();
    let _ = writeln!(out, "[{}]", vp.sheet);
    let _ = write!(out, "{:>6} ", "");
    for c in vp.left..=vp.right() {
        let _ = write!(out, " {}", fit(&col_to_letters(c), CELL_WIDTH));
    }
    out.push('\n');
    for r in vp.top..=vp.bottom() {
        let _ = write!(out, "{r:>6} ");
        for c in vp.left..=vp.right() {
            let addr = CellAddress::new(vp.sheet.clone(), c, r);
            let mut text = String::new();
            if let Some(color) = session.color_map().color_of(&addr) {
                text.push_str(color.tag());
                text.push(':');
            }
            text.push_str(&wb.content(&addr).display());
            let marked = session.error_marks().contains(&addr);
            let inner = if marked { CELL_WIDTH - 3 } else { CELL_WIDTH - 2 };
            let mut body = fit(&text, inner).trim_end().to_string();
            if marked {
                body.push('!');
            }
            let cell = if &addr == session.cursor() {
                format!("[{}]", fit(&body, CELL_WIDTH - 2))
            } else {
                format!(" {} ", fit(&body, CELL_WIDTH - 2))
            };
            out.push(' ');
            out.push_str(&cell);
        }
        out.push('\n');
    }
    let off: Vec<String> = session
        .color_map()
        .entries()
        .iter()
        .filter(|e| !is_visible(&e.target, vp))
        .map(|e| format!("{} {}", e.color.tag(), e.target))
        .collect();
    if !off.is_empty() {
        let _ = writeln!(out, "off-screen: {}", off.join(", "));
    }
    if session.legend_visible() {
        let legend: Vec<String> = crate::navengine::ColorName::PALETTE
            .iter()
            .map(|c| format!("{}={}", c.tag(), c.name()))
            .collect();
        let _ = writeln!(out, "colours: {}", legend.join(" "));
    }
    let scan = match session.scan() {
        ScanState::Active { direction, .. } => format!("scanning {direction}"),
        ScanState::Idle => "idle".to_string(),
    };
    let _ = writeln!(
        out,
        "cursor {}  {}  dwell {} ms  {}",
        session.cursor(),
        wb.content(session.cursor()).display(),
        session.dwell_ms(),
        scan
    );
    out
}
