use std::io::Read;

use super::{CellContent, Sheet, WorkbookError};

/// Build a values-only sheet from CSV. Numeric fields become numbers, empty
/// fields stay blank, everything else is text. No header row is assumed.
pub fn sheet_from_csv(name: &str, reader: impl Read) -> Result<Sheet, WorkbookError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut sheet = Sheet::new(name);
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        for (c, field) in record.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let content =
                CellContent::number(field).unwrap_or_else(|| CellContent::Text(field.to_string()));
            sheet.set(c as u32 + 1, r as u32 + 1, content);
        }
    }
    Ok(sheet)
}
