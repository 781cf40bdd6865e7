use crate::workbook::CellAddress;

/// Visible window of one sheet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Viewport {
    pub sheet: String,
    pub top: u32,
    pub left: u32,
    pub rows: u32,
    pub cols: u32,
}

impl Viewport {
    pub fn new(sheet: impl Into<String>, rows: u32, cols: u32) -> Self {
        Self {
            sheet: sheet.into(),
            top: 1,
            left: 1,
            rows,
            cols,
        }
    }

    pub fn top_left(&self) -> CellAddress {
        CellAddress::new(self.sheet.clone(), self.left, self.top)
    }

    pub fn bottom(&self) -> u32 {
        self.top + self.rows - 1
    }

    pub fn right(&self) -> u32 {
        self.left + self.cols - 1
    }

    /// Shift by the smallest amount that brings `(col, row)` into view.
    pub fn scroll_to(&mut self, col: u32, row: u32) {
        if col < self.left {
            self.left = col;
        } else if col > self.right() {
            self.left = col + 1 - self.cols;
        }
        if row < self.top {
            self.top = row;
        } else if row > self.bottom() {
            self.top = row + 1 - self.rows;
        }
    }
}

/// True when `addr` is on the viewport's sheet and inside its rectangle.
pub fn is_visible(addr: &CellAddress, viewport: &Viewport) -> bool {
    addr.sheet == viewport.sheet
        && (viewport.left..=viewport.right()).contains(&addr.col)
        && (viewport.top..=viewport.bottom()).contains(&addr.row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility() {
        let vp = Viewport::new("Sales", 31, 12);
        assert!(is_visible(&CellAddress::new("Sales", 5, 6), &vp));
        assert!(!is_visible(&CellAddress::new("Opening Stock", 5, 6), &vp));
        assert!(!is_visible(&CellAddress::new("Sales", 13, 6), &vp));
        assert!(is_visible(&CellAddress::new("Sales", 12, 31), &vp));
    }

    #[test]
    fn minimal_scroll() {
        let mut vp = Viewport::new("S", 31, 12);
        vp.scroll_to(8, 13);
        assert_eq!((vp.left, vp.top), (1, 1));
        // one row below: shift exactly one row
        vp.scroll_to(1, 32);
        assert_eq!((vp.left, vp.top), (1, 2));
        vp.scroll_to(20, 100);
        assert_eq!((vp.left, vp.top), (9, 70));
        vp.scroll_to(3, 5);
        assert_eq!((vp.left, vp.top), (3, 5));
    }
}
