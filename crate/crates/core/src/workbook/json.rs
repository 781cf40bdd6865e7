use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_a1, CellAddress, CellContent, Decimal, Sheet, Workbook, WorkbookError, MAX_COL, MAX_ROW};

#[derive(Serialize, Deserialize)]
struct WorkbookDoc {
    sheets: Vec<SheetDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    seeded_errors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SheetDoc {
    name: String,
    #[serde(default)]
    cells: CellEntries,
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    t: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fmt: Option<String>,
}

/// Cell map that keeps every entry in document order, so duplicate keys can
/// be reported instead of silently overwritten.
#[derive(Default)]
struct CellEntries(Vec<(String, CellDoc)>);

impl Serialize for CellEntries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for CellEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = CellEntries;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from A1 addresses to cells")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<CellEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, CellDoc>()? {
                    out.push((k, v));
                }
                Ok(CellEntries(out))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

/// `€1,154.67` → (`1154.67`, `€#,##0.00`).
fn strip_number_format(raw: &str) -> Option<(String, String)> {
    let trimmed = raw.trim();
    let (sign, rest) = match trimmed.strip_prefix('-') {
        Some(r) => ("-", r),
        None => ("", trimmed),
    };
    let symbol = rest.chars().next().filter(|c| matches!(c, '€' | '$' | '£'));
    let body = match symbol {
        Some(c) => &rest[c.len_utf8()..],
        None => rest,
    };
    let grouped = body.contains(',');
    if symbol.is_none() && !grouped {
        return None;
    }
    let plain = format!("{sign}{}", body.replace(',', ""));
    Decimal::parse(&plain)?;
    let decimals = plain.split_once('.').map_or(0, |(_, f)| f.len());
    let mut fmt = String::new();
    if let Some(c) = symbol {
        fmt.push(c);
    }
    fmt.push_str(if grouped || symbol.is_some() { "#,##0" } else { "0" });
    if decimals > 0 {
        fmt.push('.');
        fmt.push_str(&"0".repeat(decimals));
    }
    Some((plain, fmt))
}

fn cell_from_doc(key: &str, doc: CellDoc) -> Result<CellContent, WorkbookError> {
    let bad = |reason: &str| WorkbookError::BadCell {
        cell: key.to_string(),
        reason: reason.to_string(),
    };
    match doc.t.as_str() {
        "b" => Ok(CellContent::Blank),
        "s" => Ok(CellContent::Text(doc.v.ok_or_else(|| bad("text cell without `v`"))?)),
        "f" => {
            let v = doc.v.ok_or_else(|| bad("formula cell without `v`"))?;
            CellContent::formula(v).map_err(|e| bad(&e))
        }
        "n" => {
            let v = doc.v.ok_or_else(|| bad("number cell without `v`"))?;
            if let Some(value) = Decimal::parse(&v) {
                return Ok(CellContent::Number {
                    value,
                    format: doc.fmt,
                });
            }
            let (plain, derived) =
                strip_number_format(&v).ok_or_else(|| bad(&format!("`{v}` is not a number")))?;
            Ok(CellContent::Number {
                value: Decimal::parse(&plain).expect("validated"),
                format: Some(doc.fmt.unwrap_or(derived)),
            })
        }
        other => Err(bad(&format!("unknown type tag `{other}`"))),
    }
}

pub(super) fn load(document: &[u8]) -> Result<Workbook, WorkbookError> {
    let doc: WorkbookDoc = serde_json::from_slice(document)?;
    let mut sheets = Vec::with_capacity(doc.sheets.len());
    for sheet_doc in doc.sheets {
        let mut sheet = Sheet::new(sheet_doc.name);
        let mut seen = std::collections::BTreeSet::new();
        for (key, cell) in sheet_doc.cells.0 {
            let (col, row) = parse_a1(&key)?;
            if col > MAX_COL || row > MAX_ROW {
                return Err(WorkbookError::BadAddress(key));
            }
            if !seen.insert((col, row)) {
                return Err(WorkbookError::DuplicateCell(format!("{}!{key}", sheet.name())));
            }
            let content = cell_from_doc(&key, cell)?;
            sheet.set(col, row, content);
        }
        sheets.push(sheet);
    }
    let seeded = doc
        .seeded_errors
        .iter()
        .map(|s| s.parse::<CellAddress>())
        .collect::<Result<Vec<_>, _>>()?;
    Workbook::new(sheets)?.with_seeded_errors(seeded)
}

fn cell_to_doc(content: &CellContent) -> CellDoc {
    let (t, v, fmt) = match content {
        CellContent::Blank => ("b", None, None),
        CellContent::Number { value, format } => ("n", Some(value.to_string()), format.clone()),
        CellContent::Text(s) => ("s", Some(s.clone()), None),
        CellContent::Formula(src) => ("f", Some(src.clone()), None),
    };
    CellDoc {
        t: t.to_string(),
        v,
        fmt,
    }
}

pub(super) fn save(workbook: &Workbook) -> String {
    let doc = WorkbookDoc {
        sheets: workbook
            .sheets()
            .iter()
            .map(|sheet| SheetDoc {
                name: sheet.name().to_string(),
                cells: CellEntries(
                    sheet
                        .cells()
                        .map(|(col, row, c)| (super::format_a1(col, row), cell_to_doc(c)))
                        .collect(),
                ),
            })
            .collect(),
        seeded_errors: workbook.seeded_errors().iter().map(|a| a.to_string()).collect(),
    };
    serde_json::to_string(&doc).expect("workbook serialization cannot fail")
}
