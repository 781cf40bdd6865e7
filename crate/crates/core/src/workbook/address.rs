use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::WorkbookError;

/// Largest column addressable in a sheet (`XFD`).
pub const MAX_COL: u32 = 16_384;
/// Largest row addressable in a sheet.
pub const MAX_ROW: u32 = 1_048_576;
/// Largest column representable with three letters (`ZZZ`).
pub const MAX_A1_COL: u32 = 18_278;

/// Decode the letters of an A1 column (bijective base 26).
pub fn col_from_letters(letters: &str) -> Option<u32> {
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    let mut col = 0u32;
    for b in letters.bytes() {
        if !b.is_ascii_alphabetic() {
            return None;
        }
        col = col * 26 + u32::from(b.to_ascii_uppercase() - b'A' + 1);
    }
    Some(col)
}

pub fn col_to_letters(mut col: u32) -> String {
    debug_assert!(col >= 1);
    let mut out = Vec::with_capacity(3);
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'A' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Parse a bare A1 reference such as `E6` or `AA10` into `(col, row)`.
pub fn parse_a1(text: &str) -> Result<(u32, u32), WorkbookError> {
    let bad = || WorkbookError::BadAddress(text.to_string());
    let split = text
        .find(|c: char| !c.is_ascii_alphabetic())
        .ok_or_else(bad)?;
    let (letters, digits) = text.split_at(split);
    if letters.is_empty() || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let col = col_from_letters(letters).ok_or_else(bad)?;
    let row: u32 = digits.parse().map_err(|_| bad())?;
    if row == 0 {
        return Err(bad());
    }
    Ok((col, row))
}

pub fn format_a1(col: u32, row: u32) -> String {
    format!("{}{}", col_to_letters(col), row)
}

/// Sheet names may not contain characters spreadsheets reserve for syntax.
pub fn valid_sheet_name(name: &str) -> bool {
    !name.trim().is_empty() && !name.contains(['[', ']', ':', '*', '?', '/', '\\', '!'])
}

/// A fully qualified cell: sheet plus 1-based column and row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddress {
    pub sheet: String,
    pub col: u32,
    pub row: u32,
}

impl CellAddress {
    pub fn new(sheet: impl Into<String>, col: u32, row: u32) -> Self {
        Self {
            sheet: sheet.into(),
            col,
            row,
        }
    }

    /// Parse `E6` relative to a known sheet.
    pub fn on_sheet(sheet: &str, a1: &str) -> Result<Self, WorkbookError> {
        let (col, row) = parse_a1(a1)?;
        Ok(Self::new(sheet, col, row))
    }

    pub fn a1(&self) -> String {
        format_a1(self.col, self.row)
    }

    pub fn same_sheet(&self, other: &CellAddress) -> bool {
        self.sheet == other.sheet
    }

    pub fn with_pos(&self, col: u32, row: u32) -> Self {
        Self::new(self.sheet.clone(), col, row)
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.sheet, self.a1())
    }
}

impl FromStr for CellAddress {
    type Err = WorkbookError;

    /// Accepts `Sheet!B3`, `Sales and Profit!F4` and `'Opening Stock'!D6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorkbookError::BadAddress(s.to_string());
        let (sheet, cell) = s.rsplit_once('!').ok_or_else(bad)?;
        let sheet = match sheet.strip_prefix('\'') {
            Some(rest) => rest.strip_suffix('\'').ok_or_else(bad)?.replace("''", "'"),
            None => sheet.to_string(),
        };
        if sheet.is_empty() {
            return Err(bad());
        }
        let (col, row) = parse_a1(cell)?;
        Ok(Self::new(sheet, col, row))
    }
}

impl Serialize for CellAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive rectangle of cells on one sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub min_col: u32,
    pub min_row: u32,
    pub max_col: u32,
    pub max_row: u32,
}

impl CellRect {
    pub fn contains(&self, col: u32, row: u32) -> bool {
        (self.min_col..=self.max_col).contains(&col) && (self.min_row..=self.max_row).contains(&row)
    }

    pub fn include(&mut self, col: u32, row: u32) {
        self.min_col = self.min_col.min(col);
        self.min_row = self.min_row.min(row);
        self.max_col = self.max_col.max(col);
        self.max_row = self.max_row.max(row);
    }

    pub fn point(col: u32, row: u32) -> Self {
        Self {
            min_col: col,
            min_row: row,
            max_col: col,
            max_row: row,
        }
    }
}
