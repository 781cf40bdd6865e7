use serde::Serialize;

use super::AnalysisError;
use crate::commands::CommandSet;
use crate::formula::{extract_references, RefTarget};
use crate::num::{mean, Scalar};
use crate::tcat::{EventKind, EventLog, Visit};
use crate::workbook::{CellAddress, CellContent, CellRect, Workbook};

/// Consecutive single-step moves further apart than this break a run.
pub const RUN_GAP_MS: u64 = 10_000;
/// Regions need this many cells, counting the first.
pub const MIN_REGION_CELLS: usize = 3;
/// Fewer qualifying regions than this leave the per-cell time undefined.
pub const MIN_REGIONS: usize = 3;

/// Mean seconds per cell over scanned regions.
///
/// iVoice regions are the spans between a scan start and its stop or end;
/// baseline regions are runs of two or more single-step moves in one
/// direction. Each region contributes the time between successive arrivals,
/// so neither the first cell (where the region starts) nor the last (where
/// the user stopped to do something else) is counted.
pub fn scan_region_stats<T: Scalar>(log: &EventLog) -> Result<Option<T>, AnalysisError> {
    let regions = match log.technology() {
        CommandSet::IVoice => ivoice_regions(log),
        CommandSet::Baseline => baseline_regions(&log.visits()?),
    };
    let qualifying: Vec<&Vec<u64>> = regions
        .iter()
        .filter(|arrivals| arrivals.len() + 1 >= MIN_REGION_CELLS)
        .collect();
    if qualifying.len() < MIN_REGIONS {
        return Ok(None);
    }
    let per_cell: Vec<T> = qualifying
        .iter()
        .flat_map(|arrivals| arrivals.windows(2).map(|w| T::from_ms(w[1] - w[0])))
        .collect();
    Ok(mean(&per_cell))
}

// Arrival times of the cells after the first, one list per region.
fn ivoice_regions(log: &EventLog) -> Vec<Vec<u64>> {
    let mut regions = Vec::new();
    let mut current: Option<Vec<u64>> = None;
    for e in log.events() {
        match e.kind {
            EventKind::ScanStart => current = Some(Vec::new()),
            EventKind::CellEnter => {
                if let Some(r) = current.as_mut() {
                    r.push(e.t);
                }
            }
            EventKind::ScanStop | EventKind::ScanEnded | EventKind::ScanAutoStopped => {
                regions.extend(current.take());
            }
            _ => {}
        }
    }
    regions.extend(current);
    regions
}

fn single_step(a: &CellAddress, b: &CellAddress) -> Option<(i64, i64)> {
    let dc = i64::from(b.col) - i64::from(a.col);
    let dr = i64::from(b.row) - i64::from(a.row);
    (a.sheet == b.sheet && dc.abs() + dr.abs() == 1).then_some((dc, dr))
}

fn baseline_regions(visits: &[Visit]) -> Vec<Vec<u64>> {
    let mut regions = Vec::new();
    let mut current: Vec<u64> = Vec::new();
    let mut direction = None;
    for w in visits.windows(2) {
        let step = single_step(&w[0].addr, &w[1].addr)
            .filter(|_| w[1].enter_t - w[0].enter_t <= RUN_GAP_MS);
        match step {
            Some(d) if direction == Some(d) => current.push(w[1].enter_t),
            Some(d) => {
                if !current.is_empty() {
                    regions.push(std::mem::take(&mut current));
                }
                direction = Some(d);
                current.push(w[1].enter_t);
            }
            None => {
                if !current.is_empty() {
                    regions.push(std::mem::take(&mut current));
                }
                direction = None;
            }
        }
    }
    if !current.is_empty() {
        regions.push(current);
    }
    regions
}

/// Remote-reference check times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefNavTimes<T> {
    /// From leaving the formula cell to entering the referenced cell on
    /// another sheet.
    pub outbound: Vec<T>,
    /// From leaving the referenced cell to entering the formula cell again.
    pub back: Vec<T>,
}

fn remote_targets(workbook: &Workbook, source: &CellAddress) -> Vec<(String, CellRect)> {
    let CellContent::Formula(text) = workbook.content(source) else {
        return Vec::new();
    };
    let Ok(items) = extract_references(text) else {
        return Vec::new();
    };
    items
        .iter()
        .filter_map(|item| {
            let (sheet, rect) = match &item.target {
                RefTarget::Single(r) => (r.sheet.as_deref()?, CellRect::point(r.col, r.row)),
                RefTarget::Range(r) => (
                    r.start.sheet.as_deref()?,
                    CellRect {
                        min_col: r.start.col,
                        min_row: r.start.row,
                        max_col: r.end.col,
                        max_row: r.end.row,
                    },
                ),
            };
            let name = workbook.sheet(sheet)?.name();
            (name != source.sheet).then(|| (name.to_string(), rect))
        })
        .collect()
}

/// Trips from a formula cell to a cell it references on another sheet,
/// passing only through other sheets on the way, and the trips back.
pub fn ref_nav_times<T: Scalar>(
    log: &EventLog,
    workbook: &Workbook,
) -> Result<RefNavTimes<T>, AnalysisError> {
    let visits = log.visits()?;
    let mut out = RefNavTimes {
        outbound: Vec::new(),
        back: Vec::new(),
    };
    let mut i = 0;
    while i < visits.len() {
        let source = &visits[i];
        let targets = remote_targets(workbook, &source.addr);
        let hit = if targets.is_empty() {
            None
        } else {
            visits[i + 1..]
                .iter()
                .take_while(|v| v.addr.sheet != source.addr.sheet)
                .position(|v| {
                    targets
                        .iter()
                        .any(|(s, r)| *s == v.addr.sheet && r.contains(v.addr.col, v.addr.row))
                })
                .map(|p| i + 1 + p)
        };
        let Some(j) = hit else {
            i += 1;
            continue;
        };
        let target = &visits[j];
        out.outbound.push(T::from_ms(target.enter_t - source.leave_t));
        let home = visits[j + 1..]
            .iter()
            .position(|v| v.addr.sheet == source.addr.sheet)
            .map(|p| j + 1 + p);
        match home {
            Some(k) if visits[k].addr == source.addr => {
                out.back.push(T::from_ms(visits[k].enter_t - target.leave_t));
                i = k;
            }
            _ => i = j + 1,
        }
    }
    Ok(out)
}

/// Traversals from a non-blank cell across one or more blank cells to the
/// next non-blank cell on the same row or column, timed from leaving the
/// first cell to entering the second.
pub fn blank_jump_times<T: Scalar>(
    log: &EventLog,
    workbook: &Workbook,
) -> Result<Vec<T>, AnalysisError> {
    let visits = log.visits()?;
    let blank = |a: &CellAddress| workbook.content(a).is_blank();
    let mut out = Vec::new();
    for (i, from) in visits.iter().enumerate() {
        if blank(&from.addr) {
            continue;
        }
        let Some(j) = (i + 1..visits.len()).find(|&j| !blank(&visits[j].addr)) else {
            break;
        };
        let to = &visits[j];
        let (a, b) = (&from.addr, &to.addr);
        if a.sheet != b.sheet || (a.col != b.col && a.row != b.row) {
            continue;
        }
        let between = |c: &CellAddress| {
            c.sheet == a.sheet
                && if a.row == b.row {
                    c.row == a.row && c.col > a.col.min(b.col) && c.col < a.col.max(b.col)
                } else {
                    c.col == a.col && c.row > a.row.min(b.row) && c.row < a.row.max(b.row)
                }
        };
        let gap: Vec<CellAddress> = if a.row == b.row {
            (a.col.min(b.col) + 1..a.col.max(b.col)).map(|c| a.with_pos(c, a.row)).collect()
        } else {
            (a.row.min(b.row) + 1..a.row.max(b.row)).map(|r| a.with_pos(a.col, r)).collect()
        };
        if gap.is_empty()
            || !gap.iter().all(blank)
            || !visits[i + 1..j].iter().all(|v| between(&v.addr))
        {
            continue;
        }
        out.push(T::from_ms(to.enter_t - from.leave_t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tcat::{ActivityEvent, LogHeader};
    use crate::workbook::Sheet;

    fn log(technology: CommandSet) -> EventLog {
        EventLog::new(LogHeader {
            session: "t".into(),
            technology,
            workbook: String::new(),
            dwell_ms: 1000,
            smart_scan: false,
            viewport: (31, 12),
        })
    }

    fn addr(sheet: &str, a1: &str) -> CellAddress {
        CellAddress::on_sheet(sheet, a1).unwrap()
    }

    fn hop(log: &mut EventLog, t: u64, from: &CellAddress, to: &CellAddress) {
        log.record(ActivityEvent::leave(t, from.clone())).unwrap();
        log.record(ActivityEvent::enter(t, to.clone())).unwrap();
    }

    fn ev(log: &mut EventLog, t: u64, kind: EventKind) {
        log.record(ActivityEvent::new(t, kind, None, None)).unwrap();
    }

    // One iVoice scan down column B from row `start`, advancing `cells - 1`
    // times every `dwell` ms.
    fn ivoice_scan(log: &mut EventLog, t0: u64, start: u32, cells: u32, dwell: u64) -> u64 {
        let first = CellAddress::new("S", 2, start);
        let jump_t = log.last_t().unwrap_or(0);
        if log.events().is_empty() {
            log.record(ActivityEvent::enter(0, first.clone())).unwrap();
        } else {
            let at = log.events().iter().rev().find(|e| e.kind == EventKind::CellEnter).unwrap().addr.clone().unwrap();
            hop(log, jump_t, &at, &first);
        }
        ev(log, t0, EventKind::ScanStart);
        let mut t = t0;
        for k in 1..cells {
            t = t0 + u64::from(k) * dwell;
            hop(log, t, &CellAddress::new("S", 2, start + k - 1), &CellAddress::new("S", 2, start + k));
        }
        ev(log, t + 400, EventKind::ScanStop);
        t + 400
    }

    #[test]
    fn ivoice_scan_average_is_dwell() {
        let mut l = log(CommandSet::IVoice);
        let mut t = 0;
        for start in [1, 10, 20] {
            t = ivoice_scan(&mut l, t + 500, start, 5, 1000);
        }
        assert_eq!(scan_region_stats::<f64>(&l).unwrap(), Some(1.0));
    }

    #[test]
    fn two_regions_are_not_enough() {
        let mut l = log(CommandSet::IVoice);
        let mut t = 0;
        for start in [1, 10] {
            t = ivoice_scan(&mut l, t + 500, start, 5, 1000);
        }
        assert_eq!(scan_region_stats::<f64>(&l).unwrap(), None);
        // a two-cell region does not qualify either
        ivoice_scan(&mut l, t + 500, 30, 2, 1000);
        assert_eq!(scan_region_stats::<f64>(&l).unwrap(), None);
    }

    #[test]
    fn baseline_runs_with_constructed_gaps() {
        let mut l = log(CommandSet::Baseline);
        let mut t = 0;
        let mut at = CellAddress::new("S", 1, 1);
        l.record(ActivityEvent::enter(0, at.clone())).unwrap();
        for col in [2u32, 5, 8] {
            // jump to the top of the column, then step down four rows
            t += 3000;
            let top = CellAddress::new("S", col, 1);
            hop(&mut l, t, &at, &top);
            at = top;
            t += 1500;
            for row in 2..=5 {
                let next = CellAddress::new("S", col, row);
                hop(&mut l, t, &at, &next);
                at = next;
                t += 2620;
            }
        }
        let avg = scan_region_stats::<f64>(&l).unwrap().unwrap();
        assert!((avg - 2.62).abs() < 1e-12, "{avg}");
    }

    #[test]
    fn baseline_gap_over_ten_seconds_breaks_run() {
        let visits: Vec<Visit> = [0u64, 1000, 12_000, 13_000]
            .iter()
            .enumerate()
            .map(|(k, &t)| Visit {
                addr: CellAddress::new("S", 1, k as u32 + 1),
                enter_t: t,
                leave_t: t,
            })
            .collect();
        assert_eq!(baseline_regions(&visits), vec![vec![1000], vec![13_000]]);
    }

    fn three_sheets() -> Workbook {
        let mut src = Sheet::new("Sales");
        src.set(6, 6, CellContent::formula("=D6*(E6-'Opening Stock'!D6)").unwrap());
        let mut os = Sheet::new("Opening Stock");
        os.set(4, 6, CellContent::number("3").unwrap());
        Workbook::new(vec![os, Sheet::new("Purchases"), src]).unwrap()
    }

    #[test]
    fn ivoice_reference_check_is_instant() {
        let wb = three_sheets();
        let mut l = log(CommandSet::IVoice);
        let (f6, d6) = (addr("Sales", "F6"), addr("Opening Stock", "D6"));
        l.record(ActivityEvent::enter(0, f6.clone())).unwrap();
        hop(&mut l, 2000, &f6, &d6);
        hop(&mut l, 5000, &d6, &f6);
        let t = ref_nav_times::<f64>(&l, &wb).unwrap();
        assert_eq!(t.outbound, vec![0.0]);
        assert_eq!(t.back, vec![0.0]);
    }

    #[test]
    fn baseline_reference_check_through_tabs() {
        let wb = three_sheets();
        let mut l = log(CommandSet::Baseline);
        let f6 = addr("Sales", "F6");
        let p = addr("Purchases", "A1");
        let os_a1 = addr("Opening Stock", "A1");
        let d6 = addr("Opening Stock", "D6");
        l.record(ActivityEvent::enter(0, f6.clone())).unwrap();
        hop(&mut l, 1000, &f6, &p);
        hop(&mut l, 2500, &p, &os_a1);
        hop(&mut l, 5100, &os_a1, &d6);
        hop(&mut l, 8000, &d6, &p);
        hop(&mut l, 10_700, &p, &f6);
        let t = ref_nav_times::<f64>(&l, &wb).unwrap();
        assert_eq!(t.outbound.len(), 1);
        assert!((t.outbound[0] - 4.1).abs() < 1e-12);
        assert!((t.back[0] - 2.7).abs() < 1e-12);
        assert!(!super::super::average(&t.outbound).unwrap().reliable);
    }

    #[test]
    fn same_sheet_references_are_not_remote() {
        let wb = three_sheets();
        let mut l = log(CommandSet::IVoice);
        let f6 = addr("Sales", "F6");
        l.record(ActivityEvent::enter(0, f6.clone())).unwrap();
        hop(&mut l, 100, &f6, &addr("Sales", "E6"));
        assert!(ref_nav_times::<f64>(&l, &wb).unwrap().outbound.is_empty());
    }

    fn gap_sheet() -> Workbook {
        let mut s = Sheet::new("S");
        for a1 in ["A1", "E1", "A5"] {
            let (c, r) = crate::workbook::parse_a1(a1).unwrap();
            s.set(c, r, CellContent::number("1").unwrap());
        }
        Workbook::new(vec![s]).unwrap()
    }

    #[test]
    fn blank_jumps() {
        let wb = gap_sheet();
        let (a1, e1, a5) = (addr("S", "A1"), addr("S", "E1"), addr("S", "A5"));

        let mut l = log(CommandSet::IVoice);
        l.record(ActivityEvent::enter(0, a1.clone())).unwrap();
        hop(&mut l, 2000, &a1, &e1);
        assert_eq!(blank_jump_times::<f64>(&l, &wb).unwrap(), vec![0.0]);

        let mut l = log(CommandSet::Baseline);
        l.record(ActivityEvent::enter(0, a1.clone())).unwrap();
        let a3 = addr("S", "A3");
        hop(&mut l, 2000, &a1, &a3);
        hop(&mut l, 2700, &a3, &a5);
        hop(&mut l, 3300, &a5, &addr("S", "A6"));
        let times = blank_jump_times::<f64>(&l, &wb).unwrap();
        assert_eq!(times.len(), 1);
        assert!((times[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn no_traversals() {
        let wb = gap_sheet();
        let mut l = log(CommandSet::Baseline);
        let (a1, a5, e1) = (addr("S", "A1"), addr("S", "A5"), addr("S", "E1"));
        l.record(ActivityEvent::enter(0, a1.clone())).unwrap();
        // detour off the line between the two cells
        hop(&mut l, 100, &a1, &addr("S", "B3"));
        hop(&mut l, 200, &addr("S", "B3"), &a5);
        // diagonal
        hop(&mut l, 300, &a5, &e1);
        assert!(blank_jump_times::<f64>(&l, &wb).unwrap().is_empty());
    }
}
