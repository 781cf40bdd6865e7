//! Translation-invariant formula shapes.
//!
//! Two cells count as "semantically similar" when they hold the same class of
//! content and, for formulas, the same shape: every relative reference is
//! rewritten as an R1C1 offset from the formula's own cell, so formulas filled
//! down a column or across a row compare equal.

use std::fmt::{self, Write};

use super::lexer::Tok;
use super::{parse, FormulaError, Item, RefTarget, Reference};
use crate::workbook::{CellAddress, CellContent};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaShape(String);

impl FormulaShape {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FormulaShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn push_axis(out: &mut String, axis: char, abs: bool, value: u32, anchor: u32) {
    out.push(axis);
    if abs {
        write!(out, "{value}").unwrap();
    } else {
        let delta = i64::from(value) - i64::from(anchor);
        if delta != 0 {
            write!(out, "[{delta}]").unwrap();
        }
    }
}

fn push_r1c1(out: &mut String, r: &Reference, anchor: &CellAddress) {
    push_axis(out, 'R', r.row_abs, r.row, anchor.row);
    push_axis(out, 'C', r.col_abs, r.col, anchor.col);
}

fn push_qualifier(out: &mut String, sheet: &Option<String>) {
    if let Some(s) = sheet {
        write!(out, "'{}'!", s.replace('\'', "''")).unwrap();
    }
}

pub fn normalize_shape(source: &str, anchor: &CellAddress) -> Result<FormulaShape, FormulaError> {
    let parsed = parse(source)?;
    let mut out = String::from("=");
    for (item, _) in &parsed.items {
        match item {
            Item::Ref(RefTarget::Single(r)) => {
                push_qualifier(&mut out, &r.sheet);
                push_r1c1(&mut out, r, anchor);
            }
            Item::Ref(RefTarget::Range(range)) => {
                push_qualifier(&mut out, &range.start.sheet);
                push_r1c1(&mut out, &range.start, anchor);
                out.push(':');
                push_r1c1(&mut out, &range.end, anchor);
            }
            Item::Tok(tok) => match tok {
                Tok::Number(n) => out.push_str(n),
                Tok::Str(s) => out.push_str(s),
                Tok::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
                Tok::ErrorLit(e) => out.push_str(e),
                Tok::Func(name) | Tok::Name(name) => out.push_str(&name.to_ascii_uppercase()),
                Tok::Ref(_) => unreachable!("references are folded into items"),
                Tok::Op(op) => out.push_str(op),
                Tok::LParen => out.push('('),
                Tok::RParen => out.push(')'),
                Tok::Comma => out.push(','),
                Tok::Colon => out.push(':'),
            },
        }
    }
    Ok(FormulaShape(out))
}

/// Content class used for similarity. Formulas that fail to parse never match
/// anything, themselves included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContentShape {
    Blank,
    Number,
    Text,
    Formula(FormulaShape),
    Unparsable,
}

pub fn shape_of(content: &CellContent, anchor: &CellAddress) -> ContentShape {
    match content {
        CellContent::Blank => ContentShape::Blank,
        CellContent::Number { .. } => ContentShape::Number,
        CellContent::Text(_) => ContentShape::Text,
        CellContent::Formula(src) => normalize_shape(src, anchor)
            .map(ContentShape::Formula)
            .unwrap_or(ContentShape::Unparsable),
    }
}

pub fn similar(a: &ContentShape, b: &ContentShape) -> bool {
    match (a, b) {
        (ContentShape::Unparsable, _) | (_, ContentShape::Unparsable) => false,
        _ => a == b,
    }
}
