//! Workbook data model: ordered sheets of sparse cells, A1 addressing and the
//! JSON/CSV on-disk formats.
//!
//! Workbooks are immutable once loaded. Formulas are stored verbatim and never
//! evaluated; audits are purely navigational.

mod address;
mod csv_import;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use address::{
    col_from_letters, col_to_letters, format_a1, parse_a1, valid_sheet_name, CellAddress,
    CellRect, MAX_A1_COL, MAX_COL, MAX_ROW,
};
pub use csv_import::sheet_from_csv;

#[derive(Debug, Error)]
pub enum WorkbookError {
    #[error("malformed cell address `{0}`")]
    BadAddress(String),
    #[error("workbook has no sheets")]
    NoSheets,
    #[error("duplicate sheet name `{0}`")]
    DuplicateSheet(String),
    #[error("invalid sheet name `{0}`")]
    BadSheetName(String),
    #[error("cell {0} is defined more than once")]
    DuplicateCell(String),
    #[error("cell {cell}: {reason}")]
    BadCell { cell: String, reason: String },
    #[error("seeded error {0} does not name a sheet in the workbook")]
    UnknownSeededSheet(String),
    #[error("malformed workbook document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv import: {0}")]
    Csv(#[from] csv::Error),
}

/// A number kept as the exact decimal text it was written with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal(String);

impl Decimal {
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        let body = t.strip_prefix(['-', '+']).unwrap_or(t);
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
            return None;
        }
        if let Some(exp) = exponent {
            let exp = exp.strip_prefix(['-', '+']).unwrap_or(exp);
            if exp.is_empty() || !digits(exp) {
                return None;
            }
        }
        Some(Self(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.parse().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellContent {
    Blank,
    /// `format` is a display annotation such as `€#,##0.00`.
    Number {
        value: Decimal,
        format: Option<String>,
    },
    Text(String),
    /// Source text, always starting with `=`.
    Formula(String),
}

impl CellContent {
    pub fn number(text: &str) -> Option<Self> {
        Decimal::parse(text).map(|value| Self::Number {
            value,
            format: None,
        })
    }

    pub fn formula(source: impl Into<String>) -> Result<Self, String> {
        let source = source.into();
        if source.starts_with('=') {
            Ok(Self::Formula(source))
        } else {
            Err(format!("formula `{source}` does not start with `=`"))
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Self::Blank)
    }

    /// Cells an auditor has to enter to review: numbers and formulas.
    pub fn is_eligible(&self) -> bool {
        matches!(self, Self::Number { .. } | Self::Formula(_))
    }

    /// Text as it would appear in the grid.
    pub fn display(&self) -> String {
        match self {
            Self::Blank => String::new(),
            Self::Number { value, format } => match format {
                Some(f) if f.starts_with(['€', '$', '£']) => {
                    let symbol = f.chars().next().unwrap();
                    format!("{symbol}{value}")
                }
                _ => value.to_string(),
            },
            Self::Text(s) => s.clone(),
            Self::Formula(src) => src.clone(),
        }
    }
}

static BLANK: CellContent = CellContent::Blank;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sheet {
    name: String,
    // Keyed (row, col) so iteration is row-major.
    cells: BTreeMap<(u32, u32), CellContent>,
    used: Option<CellRect>,
}

impl Sheet {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            cells: BTreeMap::new(),
            used: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Store a cell. Blank content removes whatever was there.
    pub fn set(&mut self, col: u32, row: u32, content: CellContent) {
        if content.is_blank() {
            if self.cells.remove(&(row, col)).is_some() {
                self.recompute_used();
            }
            return;
        }
        self.cells.insert((row, col), content);
        match &mut self.used {
            Some(rect) => rect.include(col, row),
            None => self.used = Some(CellRect::point(col, row)),
        }
    }

    fn recompute_used(&mut self) {
        let mut used: Option<CellRect> = None;
        for &(row, col) in self.cells.keys() {
            match &mut used {
                Some(r) => r.include(col, row),
                None => used = Some(CellRect::point(col, row)),
            }
        }
        self.used = used;
    }

    pub fn get(&self, col: u32, row: u32) -> &CellContent {
        self.cells.get(&(row, col)).unwrap_or(&BLANK)
    }

    /// Tight bounding box of non-blank cells; `None` for an empty sheet.
    pub fn used_range(&self) -> Option<CellRect> {
        self.used
    }

    /// Non-blank cells in row-major order as `(col, row, content)`.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, &CellContent)> {
        self.cells.iter().map(|(&(row, col), c)| (col, row, c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Workbook {
    sheets: Vec<Sheet>,
    seeded_errors: BTreeSet<CellAddress>,
}

impl Workbook {
    /// Build from sheets in tab order, enforcing case-insensitive unique names.
    pub fn new(sheets: Vec<Sheet>) -> Result<Self, WorkbookError> {
        if sheets.is_empty() {
            return Err(WorkbookError::NoSheets);
        }
        let mut seen = BTreeSet::new();
        for sheet in &sheets {
            if !valid_sheet_name(&sheet.name) {
                return Err(WorkbookError::BadSheetName(sheet.name.clone()));
            }
            if !seen.insert(sheet.name.to_lowercase()) {
                return Err(WorkbookError::DuplicateSheet(sheet.name.clone()));
            }
        }
        Ok(Self {
            sheets,
            seeded_errors: BTreeSet::new(),
        })
    }

    pub fn with_seeded_errors(
        mut self,
        seeded: impl IntoIterator<Item = CellAddress>,
    ) -> Result<Self, WorkbookError> {
        for addr in seeded {
            let canonical = self
                .canonical(&addr)
                .ok_or_else(|| WorkbookError::UnknownSeededSheet(addr.to_string()))?;
            self.seeded_errors.insert(canonical);
        }
        Ok(self)
    }

    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }

    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets
            .iter()
            .position(|s| s.name.to_lowercase() == name.to_lowercase())
    }

    pub fn sheet(&self, name: &str) -> Option<&Sheet> {
        self.sheet_index(name).map(|i| &self.sheets[i])
    }

    /// Same address with the sheet name spelled as in the workbook, if the
    /// sheet exists and the coordinates are addressable.
    pub fn canonical(&self, addr: &CellAddress) -> Option<CellAddress> {
        let sheet = self.sheet(&addr.sheet)?;
        if addr.col == 0 || addr.row == 0 || addr.col > MAX_COL || addr.row > MAX_ROW {
            return None;
        }
        Some(CellAddress::new(sheet.name.clone(), addr.col, addr.row))
    }

    pub fn content(&self, addr: &CellAddress) -> &CellContent {
        self.sheet(&addr.sheet)
            .map(|s| s.get(addr.col, addr.row))
            .unwrap_or(&BLANK)
    }

    pub fn seeded_errors(&self) -> &BTreeSet<CellAddress> {
        &self.seeded_errors
    }

    /// Cells holding a number or a formula.
    pub fn classify_eligible(&self) -> BTreeSet<CellAddress> {
        self.sheets
            .iter()
            .flat_map(|sheet| {
                sheet
                    .cells()
                    .filter(|(_, _, c)| c.is_eligible())
                    .map(|(col, row, _)| CellAddress::new(sheet.name.clone(), col, row))
            })
            .collect()
    }

    pub fn add_sheet(&mut self, sheet: Sheet) -> Result<(), WorkbookError> {
        if !valid_sheet_name(&sheet.name) {
            return Err(WorkbookError::BadSheetName(sheet.name.clone()));
        }
        if self.sheet_index(&sheet.name).is_some() {
            return Err(WorkbookError::DuplicateSheet(sheet.name.clone()));
        }
        self.sheets.push(sheet);
        Ok(())
    }

    pub fn load(document: &[u8]) -> Result<Self, WorkbookError> {
        json::load(document)
    }

    /// Canonical JSON serialization.
    pub fn to_json(&self) -> String {
        json::save(self)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
