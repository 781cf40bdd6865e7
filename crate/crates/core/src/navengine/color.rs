use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::viewport::{is_visible, Viewport};
use crate::formula::extract_references;
use crate::workbook::{CellAddress, CellContent, Workbook};

/// Shortcut colours, in assignment order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorName {
    Blue,
    Green,
    Pink,
    Red,
    Lime,
    Orange,
    Purple,
}

impl ColorName {
    pub const PALETTE: [ColorName; 7] = [
        ColorName::Blue,
        ColorName::Green,
        ColorName::Pink,
        ColorName::Red,
        ColorName::Lime,
        ColorName::Orange,
        ColorName::Purple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Blue => "blue",
            Self::Green => "green",
            Self::Pink => "pink",
            Self::Red => "red",
            Self::Lime => "lime",
            Self::Orange => "orange",
            Self::Purple => "purple",
        }
    }

    /// Two-letter tag for text rendering.
    pub fn tag(self) -> &'static str {
        match self {
            Self::Blue => "Bl",
            Self::Green => "Gr",
            Self::Pink => "Pk",
            Self::Red => "Rd",
            Self::Lime => "Li",
            Self::Orange => "Or",
            Self::Purple => "Pu",
        }
    }
}

impl fmt::Display for ColorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColorName::PALETTE
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown colour `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorEntry {
    pub color: ColorName,
    pub target: CellAddress,
    pub visible: bool,
}

/// Up to seven colour shortcuts, assigned in palette order without gaps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorMap(Vec<ColorEntry>);

impl ColorMap {
    pub fn entries(&self) -> &[ColorEntry] {
        &self.0
    }

    pub fn get(&self, color: ColorName) -> Option<&ColorEntry> {
        self.0.iter().find(|e| e.color == color)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn color_of(&self, addr: &CellAddress) -> Option<ColorName> {
        self.0.iter().find(|e| &e.target == addr).map(|e| e.color)
    }
}

/// Colour map for the formula at `cursor`, plus a diagnostic when the formula
/// does not parse or names sheets the workbook lacks.
pub(crate) fn reference_colors(
    workbook: &Workbook,
    cursor: &CellAddress,
    viewport: &Viewport,
) -> (ColorMap, Option<String>) {
    let CellContent::Formula(source) = workbook.content(cursor) else {
        return (ColorMap::default(), None);
    };
    let items = match extract_references(source) {
        Ok(items) => items,
        Err(e) => return (ColorMap::default(), Some(format!("formula parse failure: {e}"))),
    };
    let mut targets: Vec<CellAddress> = Vec::new();
    let mut unresolved = Vec::new();
    for item in &items {
        if targets.len() == ColorName::PALETTE.len() {
            break;
        }
        let r = item.target.anchor_cell();
        let sheet = r.sheet.as_deref().unwrap_or(&cursor.sheet);
        match workbook.canonical(&CellAddress::new(sheet, r.col, r.row)) {
            Some(addr) if !targets.contains(&addr) => targets.push(addr),
            Some(_) => {}
            None => unresolved.push(item.target.to_string()),
        }
    }
    let map = ColorMap(
        targets
            .into_iter()
            .zip(ColorName::PALETTE)
            .map(|(target, color)| ColorEntry {
                visible: is_visible(&target, viewport),
                color,
                target,
            })
            .collect(),
    );
    let diag = (!unresolved.is_empty())
        .then(|| format!("unresolved references: {}", unresolved.join(", ")));
    (map, diag)
}
