//! Latency model comparing the dictation baseline with the shortcut commands.
//!
//! Costs per task, in seconds:
//!
//! | task                   | baseline                    | iVoice                   |
//! |------------------------|-----------------------------|--------------------------|
//! | `check_remote_ref(k)`  | `out * max(1, k) + back`    | 0                        |
//! | `scan_range(n)`        | `(n - 1) * scan_baseline`   | `(n - 1) * scan_ivoice + stop` |
//! | `skip_blanks(g)`       | `blank_baseline`            | `blank_ivoice`           |
//!
//! The first cell of a scanned range is not charged, and per-cell scan rates
//! include the time spent reviewing each cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commands::CommandSet;
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar"))]
pub struct LatencyProfile<T> {
    pub ref_nav_out_s: T,
    pub ref_nav_back_s: T,
    pub scan_cell_baseline_s: T,
    pub scan_cell_ivoice_s: T,
    pub blank_jump_baseline_s: T,
    pub blank_jump_ivoice_s: T,
    pub stop_latency_s: T,
}

impl<T: Scalar> Default for LatencyProfile<T> {
    fn default() -> Self {
        Self {
            ref_nav_out_s: T::lit(4.1),
            ref_nav_back_s: T::lit(2.7),
            scan_cell_baseline_s: T::lit(2.77),
            scan_cell_ivoice_s: T::lit(1.0),
            blank_jump_baseline_s: T::lit(1.3),
            blank_jump_ivoice_s: T::zero(),
            stop_latency_s: T::zero(),
        }
    }
}

impl<T: Scalar> LatencyProfile<T> {
    fn fields(&self) -> [(&'static str, T); 7] {
        [
            ("ref_nav_out_s", self.ref_nav_out_s),
            ("ref_nav_back_s", self.ref_nav_back_s),
            ("scan_cell_baseline_s", self.scan_cell_baseline_s),
            ("scan_cell_ivoice_s", self.scan_cell_ivoice_s),
            ("blank_jump_baseline_s", self.blank_jump_baseline_s),
            ("blank_jump_ivoice_s", self.blank_jump_ivoice_s),
            ("stop_latency_s", self.stop_latency_s),
        ]
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match self.fields().into_iter().find(|(_, v)| !v.is_finite() || *v < T::zero()) {
            Some((name, _)) => Err(SimError::BadProfile(name)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum AuditTask {
    /// Visit a cell on another sheet, `intermediate_sheets` tabs away, and
    /// come back.
    CheckRemoteRef { intermediate_sheets: u32 },
    ScanRange { cells: u32 },
    SkipBlanks { gap_cells: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AuditScript {
    pub tasks: Vec<AuditTask>,
}

impl AuditScript {
    pub fn validate(&self) -> Result<(), SimError> {
        for (index, task) in self.tasks.iter().enumerate() {
            let ok = match *task {
                AuditTask::CheckRemoteRef { .. } => true,
                AuditTask::ScanRange { cells } => cells >= 1,
                AuditTask::SkipBlanks { gap_cells } => gap_cells >= 1,
            };
            if !ok {
                return Err(SimError::BadTask { index });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("profile field {0} must be a finite, non-negative number")]
    BadProfile(&'static str),
    #[error("task {index} needs a count of at least 1")]
    BadTask { index: usize },
}

/// Seconds one technology spends on one task.
pub fn task_seconds<T: Scalar>(task: &AuditTask, profile: &LatencyProfile<T>, technology: CommandSet) -> T {
    let p = profile;
    match (*task, technology) {
        (AuditTask::CheckRemoteRef { intermediate_sheets }, CommandSet::Baseline) => {
            p.ref_nav_out_s * T::from_u32(intermediate_sheets.max(1)).expect("fits") + p.ref_nav_back_s
        }
        (AuditTask::CheckRemoteRef { .. }, CommandSet::IVoice) => T::zero(),
        (AuditTask::ScanRange { cells }, tech) => {
            let charged = T::from_u32(cells.saturating_sub(1)).expect("fits");
            match tech {
                CommandSet::Baseline => charged * p.scan_cell_baseline_s,
                CommandSet::IVoice => charged * p.scan_cell_ivoice_s + p.stop_latency_s,
            }
        }
        (AuditTask::SkipBlanks { .. }, CommandSet::Baseline) => p.blank_jump_baseline_s,
        (AuditTask::SkipBlanks { .. }, CommandSet::IVoice) => p.blank_jump_ivoice_s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskTiming<T> {
    pub task: AuditTask,
    pub baseline_s: T,
    pub ivoice_s: T,
    pub saving_s: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport<T> {
    pub tasks: Vec<TaskTiming<T>>,
    pub baseline_total_s: T,
    pub ivoice_total_s: T,
    pub saving_total_s: T,
}

impl<T: Scalar> SimReport<T> {
    /// Baseline over iVoice seconds per scanned cell, across all scan tasks.
    pub fn scan_per_cell_ratio(&self) -> Option<T> {
        let (b, i) = self
            .tasks
            .iter()
            .filter(|t| matches!(t.task, AuditTask::ScanRange { .. }))
            .fold((T::zero(), T::zero()), |(b, i), t| (b + t.baseline_s, i + t.ivoice_s));
        (i > T::zero()).then(|| b / i)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<28} {:>10} {:>10} {:>10}\n", "task", "baseline", "ivoice", "saving");
        for t in &self.tasks {
            let name = match t.task {
                AuditTask::CheckRemoteRef { intermediate_sheets } => format!("check_remote_ref({intermediate_sheets})"),
                AuditTask::ScanRange { cells } => format!("scan_range({cells})"),
                AuditTask::SkipBlanks { gap_cells } => format!("skip_blanks({gap_cells})"),
            };
            out += &format!("{name:<28} {:>10.2} {:>10.2} {:>10.2}\n", t.baseline_s, t.ivoice_s, t.saving_s);
        }
        out += &format!(
            "{:<28} {:>10.2} {:>10.2} {:>10.2}\n",
            "total", self.baseline_total_s, self.ivoice_total_s, self.saving_total_s
        );
        out
    }
}

pub fn simulate<T: Scalar>(script: &AuditScript, profile: &LatencyProfile<T>) -> Result<SimReport<T>, SimError> {
    profile.validate()?;
    script.validate()?;
    let tasks: Vec<TaskTiming<T>> = script
        .tasks
        .iter()
        .map(|task| {
            let baseline_s = task_seconds(task, profile, CommandSet::Baseline);
            let ivoice_s = task_seconds(task, profile, CommandSet::IVoice);
            TaskTiming {
                task: *task,
                baseline_s,
                ivoice_s,
                saving_s: baseline_s - ivoice_s,
            }
        })
        .collect();
    let sum = |f: fn(&TaskTiming<T>) -> T| tasks.iter().fold(T::zero(), |acc, t| acc + f(t));
    Ok(SimReport {
        baseline_total_s: sum(|t| t.baseline_s),
        ivoice_total_s: sum(|t| t.ivoice_s),
        saving_total_s: sum(|t| t.saving_s),
        tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(task: AuditTask) -> SimReport<f64> {
        simulate(&AuditScript { tasks: vec![task] }, &LatencyProfile::default()).unwrap()
    }

    #[test]
    fn remote_reference_saving() {
        let r = one(AuditTask::CheckRemoteRef { intermediate_sheets: 1 });
        assert!((r.baseline_total_s - 6.8).abs() < 1e-12);
        assert_eq!(r.ivoice_total_s, 0.0);
        let r3 = one(AuditTask::CheckRemoteRef { intermediate_sheets: 3 });
        assert!((r3.baseline_total_s - (3.0 * 4.1 + 2.7)).abs() < 1e-12);
        let r0 = one(AuditTask::CheckRemoteRef { intermediate_sheets: 0 });
        assert_eq!(r0.baseline_total_s, r.baseline_total_s);
    }

    #[test]
    fn scan_range_ratio() {
        let r = one(AuditTask::ScanRange { cells: 10 });
        assert!((r.baseline_total_s - 24.93).abs() < 1e-9);
        assert_eq!(r.ivoice_total_s, 9.0);
        assert!((r.scan_per_cell_ratio().unwrap() - 2.77).abs() < 1e-12);
        assert_eq!(one(AuditTask::ScanRange { cells: 1 }).scan_per_cell_ratio(), None);
    }

    #[test]
    fn blank_skip_saving() {
        for gap in [1, 4, 100] {
            assert!((one(AuditTask::SkipBlanks { gap_cells: gap }).saving_total_s - 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn stop_latency_is_added_time() {
        let profile = LatencyProfile { stop_latency_s: 0.5, ..LatencyProfile::<f64>::default() };
        let r = simulate(&AuditScript { tasks: vec![AuditTask::ScanRange { cells: 5 }] }, &profile).unwrap();
        assert_eq!(r.ivoice_total_s, 4.5);
    }

    #[test]
    fn validation() {
        let empty = simulate::<f64>(&AuditScript::default(), &LatencyProfile::default()).unwrap();
        assert_eq!((empty.baseline_total_s, empty.ivoice_total_s), (0.0, 0.0));
        let bad = LatencyProfile { ref_nav_back_s: -1.0, ..LatencyProfile::<f64>::default() };
        assert_eq!(simulate(&AuditScript::default(), &bad), Err(SimError::BadProfile("ref_nav_back_s")));
        let script = AuditScript { tasks: vec![AuditTask::ScanRange { cells: 0 }] };
        assert_eq!(simulate::<f64>(&script, &LatencyProfile::default()), Err(SimError::BadTask { index: 0 }));
    }

    #[test]
    fn script_json() {
        let s: AuditScript = serde_json::from_str(
            r#"{"tasks":[{"task":"check_remote_ref","intermediate_sheets":2},{"task":"scan_range","cells":10},{"task":"skip_blanks","gap_cells":3}]}"#,
        )
        .unwrap();
        assert_eq!(s.tasks.len(), 3);
        let p: LatencyProfile<f32> = serde_json::from_str(r#"{"stop_latency_s":0.25}"#).unwrap();
        assert_eq!(p.ref_nav_out_s, 4.1);
        assert_eq!(p.stop_latency_s, 0.25);
    }

    fn arb_task() -> impl Strategy<Value = AuditTask> {
        prop_oneof![
            (0u32..6).prop_map(|k| AuditTask::CheckRemoteRef { intermediate_sheets: k }),
            (1u32..40).prop_map(|n| AuditTask::ScanRange { cells: n }),
            (1u32..40).prop_map(|g| AuditTask::SkipBlanks { gap_cells: g }),
        ]
    }

    proptest! {
        #[test]
        fn totals_are_additive(tasks in proptest::collection::vec(arb_task(), 0..20), times in 1usize..4) {
            let once = simulate::<f64>(&AuditScript { tasks: tasks.clone() }, &LatencyProfile::default()).unwrap();
            let repeated: Vec<AuditTask> = (0..times).flat_map(|_| tasks.clone()).collect();
            let many = simulate::<f64>(&AuditScript { tasks: repeated }, &LatencyProfile::default()).unwrap();
            let k = times as f64;
            prop_assert!((many.baseline_total_s - k * once.baseline_total_s).abs() < 1e-9);
            prop_assert!((many.ivoice_total_s - k * once.ivoice_total_s).abs() < 1e-9);
            for t in &many.tasks {
                prop_assert_eq!(t.saving_s, t.baseline_s - t.ivoice_s);
            }
        }
    }
}
