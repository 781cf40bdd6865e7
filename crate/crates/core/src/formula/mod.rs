//! Formula tokenizing, reference extraction and translation-invariant shapes.
//!
//! Supported grammar: numbers, strings, booleans, error literals, A1 references
//! with optional `$` markers and an optional `Sheet!` or `'Quoted Sheet'!`
//! qualifier, ranges `a:b`, the operators `+ - * / ^ % & = <> < <= > >=`,
//! parentheses and comma-separated function calls. 3-D ranges and references
//! into other workbooks are rejected.

mod lexer;
mod shape;

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use lexer::{tokenize, Tok, Token};
use crate::workbook::format_a1;

pub use shape::{normalize_shape, shape_of, similar, ContentShape, FormulaShape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("formula does not start with `=`")]
    MissingEquals,
    #[error("unterminated string literal at {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated sheet name at {offset}")]
    UnterminatedSheetName { offset: usize },
    #[error("`!` at {offset} is not followed by a cell reference")]
    DanglingBang { offset: usize },
    #[error("3-D references are not supported (at {offset})")]
    ThreeDReference { offset: usize },
    #[error("references to other workbooks are not supported (at {offset})")]
    ExternalReference { offset: usize },
    #[error("range ends refer to different sheets (at {offset})")]
    MixedSheetRange { offset: usize },
    #[error("`:` at {offset} must join two cell references")]
    BadRange { offset: usize },
    #[error("unexpected character `{ch}` at {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("unexpected token at {offset}")]
    UnexpectedToken { offset: usize },
    #[error("formula ends unexpectedly")]
    UnexpectedEnd,
}

/// A single-cell reference as written in a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reference {
    /// Unquoted sheet name, when qualified.
    pub sheet: Option<String>,
    pub col: u32,
    pub row: u32,
    pub col_abs: bool,
    pub row_abs: bool,
}

impl Reference {
    pub fn relative(col: u32, row: u32) -> Self {
        Self {
            sheet: None,
            col,
            row,
            col_abs: false,
            row_abs: false,
        }
    }

    pub fn on(mut self, sheet: &str) -> Self {
        self.sheet = Some(sheet.to_string());
        self
    }
}

fn write_qualifier(f: &mut fmt::Formatter<'_>, sheet: &Option<String>) -> fmt::Result {
    match sheet {
        Some(s) if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !s.starts_with(|c: char| c.is_ascii_digit()) =>
        {
            write!(f, "{s}!")
        }
        Some(s) => write!(f, "'{}'!", s.replace('\'', "''")),
        None => Ok(()),
    }
}

fn write_cell(f: &mut fmt::Formatter<'_>, r: &Reference) -> fmt::Result {
    let a1 = format_a1(r.col, r.row);
    let split = a1.find(|c: char| c.is_ascii_digit()).unwrap_or(a1.len());
    let (letters, digits) = a1.split_at(split);
    let dollar = |abs: bool| if abs { "$" } else { "" };
    write!(f, "{}{letters}{}{digits}", dollar(r.col_abs), dollar(r.row_abs))
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_qualifier(f, &self.sheet)?;
        write_cell(f, self)
    }
}

/// Rectangular range; both ends share the sheet qualifier and the corners are
/// normalized so `start` is top-left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RangeRef {
    pub start: Reference,
    pub end: Reference,
}

impl RangeRef {
    pub fn new(a: Reference, b: Reference) -> Self {
        let sheet = a.sheet.clone().or_else(|| b.sheet.clone());
        let (c0, ca0, c1, ca1) = if a.col <= b.col {
            (a.col, a.col_abs, b.col, b.col_abs)
        } else {
            (b.col, b.col_abs, a.col, a.col_abs)
        };
        let (r0, ra0, r1, ra1) = if a.row <= b.row {
            (a.row, a.row_abs, b.row, b.row_abs)
        } else {
            (b.row, b.row_abs, a.row, a.row_abs)
        };
        Self {
            start: Reference {
                sheet: sheet.clone(),
                col: c0,
                row: r0,
                col_abs: ca0,
                row_abs: ra0,
            },
            end: Reference {
                sheet,
                col: c1,
                row: r1,
                col_abs: ca1,
                row_abs: ra1,
            },
        }
    }
}

impl fmt::Display for RangeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_qualifier(f, &self.start.sheet)?;
        write_cell(f, &self.start)?;
        f.write_str(":")?;
        write_cell(f, &self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RefTarget {
    Single(Reference),
    Range(RangeRef),
}

impl RefTarget {
    /// The cell a navigation shortcut lands on: ranges map to their first cell.
    pub fn anchor_cell(&self) -> &Reference {
        match self {
            Self::Single(r) => r,
            Self::Range(r) => &r.start,
        }
    }
}

impl fmt::Display for RefTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(r) => r.fmt(f),
            Self::Range(r) => r.fmt(f),
        }
    }
}

/// A reference plus the byte span it occupies in the formula source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefItem {
    pub target: RefTarget,
    pub span: Range<usize>,
}

/// Token stream after ranges have been folded into single items.
#[derive(Debug, Clone)]
pub(crate) enum Item {
    Tok(Tok),
    Ref(RefTarget),
}

#[derive(Debug, Clone)]
pub(crate) struct Parsed {
    pub items: Vec<(Item, Range<usize>)>,
}

fn fold_ranges(tokens: Vec<Token>) -> Result<Vec<(Item, Range<usize>)>, FormulaError> {
    let mut out: Vec<(Item, Range<usize>)> = Vec::with_capacity(tokens.len());
    let mut iter = tokens.into_iter().peekable();
    while let Some(Token { tok, span }) = iter.next() {
        match tok {
            Tok::Ref(start) => {
                if matches!(iter.peek(), Some(Token { tok: Tok::Colon, .. })) {
                    let colon = iter.next().unwrap();
                    match iter.next() {
                        Some(Token {
                            tok: Tok::Ref(end),
                            span: end_span,
                        }) => {
                            if end.sheet.is_some() && end.sheet != start.sheet {
                                return Err(FormulaError::MixedSheetRange {
                                    offset: colon.span.start,
                                });
                            }
                            out.push((
                                Item::Ref(RefTarget::Range(RangeRef::new(start, end))),
                                span.start..end_span.end,
                            ));
                        }
                        _ => return Err(FormulaError::BadRange { offset: colon.span.start }),
                    }
                } else {
                    out.push((Item::Ref(RefTarget::Single(start)), span));
                }
            }
            Tok::Colon => return Err(FormulaError::BadRange { offset: span.start }),
            other => out.push((Item::Tok(other), span)),
        }
    }
    Ok(out)
}

/// Recursive-descent check that the item stream forms one expression.
struct Checker<'a> {
    items: &'a [(Item, Range<usize>)],
    pos: usize,
}

impl Checker<'_> {
    fn peek(&self) -> Option<&Item> {
        self.items.get(self.pos).map(|(i, _)| i)
    }

    fn offset(&self) -> usize {
        self.items.get(self.pos).map_or(0, |(_, s)| s.start)
    }

    fn unexpected(&self) -> FormulaError {
        if self.pos >= self.items.len() {
            FormulaError::UnexpectedEnd
        } else {
            FormulaError::UnexpectedToken { offset: self.offset() }
        }
    }

    fn expr(&mut self) -> Result<(), FormulaError> {
        self.operand()?;
        while let Some(Item::Tok(Tok::Op(op))) = self.peek() {
            if *op == "%" {
                self.pos += 1;
                continue;
            }
            self.pos += 1;
            self.operand()?;
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<(), FormulaError> {
        while let Some(Item::Tok(Tok::Op("+" | "-"))) = self.peek() {
            self.pos += 1;
        }
        match self.peek() {
            Some(Item::Ref(_))
            | Some(Item::Tok(
                Tok::Number(_) | Tok::Str(_) | Tok::Bool(_) | Tok::ErrorLit(_) | Tok::Name(_),
            )) => {
                self.pos += 1;
                Ok(())
            }
            Some(Item::Tok(Tok::LParen)) => {
                self.pos += 1;
                self.expr()?;
                self.close()
            }
            Some(Item::Tok(Tok::Func(_))) => {
                self.pos += 1;
                match self.peek() {
                    Some(Item::Tok(Tok::LParen)) => self.pos += 1,
                    _ => return Err(self.unexpected()),
                }
                if let Some(Item::Tok(Tok::RParen)) = self.peek() {
                    self.pos += 1;
                    return Ok(());
                }
                loop {
                    // empty arguments, as in IF(A1,,0)
                    if !matches!(self.peek(), Some(Item::Tok(Tok::Comma | Tok::RParen))) {
                        self.expr()?;
                    }
                    match self.peek() {
                        Some(Item::Tok(Tok::Comma)) => self.pos += 1,
                        _ => return self.close(),
                    }
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn close(&mut self) -> Result<(), FormulaError> {
        match self.peek() {
            Some(Item::Tok(Tok::RParen)) => {
                self.pos += 1;
                Ok(())
            }
            None => Err(FormulaError::UnbalancedParens),
            _ => Err(self.unexpected()),
        }
    }
}

pub(crate) fn parse(source: &str) -> Result<Parsed, FormulaError> {
    let tokens = tokenize(source)?;
    let mut depth = 0i32;
    for t in &tokens {
        match t.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth < 0 {
                    return Err(FormulaError::UnbalancedParens);
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(FormulaError::UnbalancedParens);
    }
    let items = fold_ranges(tokens)?;
    let mut checker = Checker {
        items: &items,
        pos: 0,
    };
    checker.expr()?;
    if checker.pos != items.len() {
        return Err(checker.unexpected());
    }
    Ok(Parsed { items })
}

/// References in left-to-right order. Range ends are not reported separately
/// and duplicates are kept.
pub fn extract_references(source: &str) -> Result<Vec<RefItem>, FormulaError> {
    Ok(parse(source)?
        .items
        .into_iter()
        .filter_map(|(item, span)| match item {
            Item::Ref(target) => Some(RefItem { target, span }),
            Item::Tok(_) => None,
        })
        .collect())
}

/// Parse reference text on its own, e.g. `'Opening Stock'!D6` or `F3:F13`.
pub fn parse_reference(text: &str) -> Result<RefTarget, FormulaError> {
    let source = format!("={text}");
    let mut items = extract_references(&source)?;
    match items.len() {
        1 if items[0].span == (1..source.len()) => Ok(items.remove(0).target),
        _ => Err(FormulaError::UnexpectedToken { offset: 0 }),
    }
}
