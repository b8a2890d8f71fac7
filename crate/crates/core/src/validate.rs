//! Safety and completeness checks on a colour table, and the exact-match
//! comparison against a golden table.

use serde::{Deserialize, Serialize};

use crate::config::IntersectionConfig;
use crate::emit::{ColorTable, GREEN, OFF, RED, RED_AMBER};
use crate::movement::{MovementId, Turn};

pub const CONFLICT: &str = "conflict";
pub const SHORT_WALK: &str = "short-walk";
pub const MISSING_CRITICAL: &str = "missing-critical";
pub const UNSUPPORTED_MOVEMENT: &str = "unsupported-movement";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub seconds: Vec<u32>,
    pub movements: Vec<MovementId>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new(errors: Vec<Finding>, warnings: Vec<Finding>) -> Self {
        let verdict = if errors.is_empty() {
            Verdict::Valid
        } else {
            Verdict::Invalid
        };
        ValidationReport {
            verdict,
            errors,
            warnings,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn has_error(&self, code: &str) -> bool {
        self.errors.iter().any(|f| f.code == code)
    }
}

fn stopped(code: i8) -> bool {
    code == RED || code == RED_AMBER
}

fn is_left(m: MovementId) -> bool {
    matches!(
        m,
        MovementId::Vehicle {
            turn: Turn::Left,
            ..
        }
    )
}

/// Groups a sorted set of seconds into circular runs.
fn circular_runs(seconds: &[u32], cycle: u32) -> Vec<Vec<u32>> {
    let mut runs: Vec<Vec<u32>> = Vec::new();
    for &t in seconds {
        match runs.last_mut() {
            Some(run) if run.last() == Some(&(t.wrapping_sub(1))) => run.push(t),
            _ => runs.push(vec![t]),
        }
    }
    if runs.len() > 1 && runs[0][0] == 0 && runs.last().and_then(|r| r.last()) == Some(&(cycle - 1))
    {
        let head = runs.remove(0);
        runs.last_mut().expect("more than one run").extend(head);
    }
    runs
}

fn span_text(run: &[u32]) -> String {
    match (run.first(), run.last()) {
        (Some(a), Some(b)) if a == b => format!("second {a}"),
        (Some(a), Some(b)) => format!("seconds {a}-{b}"),
        _ => String::new(),
    }
}

/// Seconds at which both movements of a conflicting pair may move.
pub fn check_conflicts(table: &ColorTable, cfg: &IntersectionConfig) -> Vec<Finding> {
    let exceptions = cfg.exception_set();
    let mut out = Vec::new();
    for (a, b) in cfg.conflict_set() {
        let (Some(ra), Some(rb)) = (table.row(a), table.row(b)) else {
            continue;
        };
        let excepted = exceptions.contains(&(a, b));
        let bad: Vec<u32> = (0..table.cycle)
            .filter(|&t| {
                let (ca, cb) = (ra[t as usize], rb[t as usize]);
                if stopped(ca) || stopped(cb) {
                    return false;
                }
                let excused = excepted && ((is_left(a) && ca == OFF) || (is_left(b) && cb == OFF));
                !excused
            })
            .collect();
        for run in circular_runs(&bad, table.cycle) {
            out.push(Finding {
                code: CONFLICT.into(),
                message: format!("{a} and {b} both have right of way at {}", span_text(&run)),
                seconds: run,
                movements: vec![a, b],
            });
        }
    }
    out
}

/// WALK intervals shorter than the configured minimum.
pub fn check_walk(table: &ColorTable, cfg: &IntersectionConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for (&m, row) in table.rows.iter().filter(|(m, _)| m.is_pedestrian()) {
        let walk: Vec<u32> = (0..table.cycle)
            .filter(|&t| row[t as usize] == GREEN)
            .collect();
        let runs = circular_runs(&walk, table.cycle);
        if runs.is_empty() {
            out.push(Finding {
                code: SHORT_WALK.into(),
                seconds: Vec::new(),
                movements: vec![m],
                message: format!("{m} never shows WALK"),
            });
        }
        for run in runs {
            if (run.len() as u32) < cfg.min_walk {
                out.push(Finding {
                    code: SHORT_WALK.into(),
                    message: format!(
                        "{m} WALK lasts {} s at {}, below the {} s minimum",
                        run.len(),
                        span_text(&run),
                        cfg.min_walk
                    ),
                    seconds: run,
                    movements: vec![m],
                });
            }
        }
    }
    out
}

/// Missing critical movements and movements the intersection lacks.
pub fn check_completeness(table: &ColorTable, cfg: &IntersectionConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for &m in &cfg.critical {
        if !table.rows.contains_key(&m) {
            out.push(Finding {
                code: MISSING_CRITICAL.into(),
                seconds: Vec::new(),
                movements: vec![m],
                message: format!("critical movement {m} is missing from the plan"),
            });
        }
    }
    for &m in table.rows.keys() {
        if !cfg.movements.contains(&m) {
            out.push(Finding {
                code: UNSUPPORTED_MOVEMENT.into(),
                seconds: Vec::new(),
                movements: vec![m],
                message: format!("the intersection has no signal group for {m}"),
            });
        }
    }
    out
}

pub fn validate(table: &ColorTable, cfg: &IntersectionConfig) -> ValidationReport {
    let mut errors = check_conflicts(table, cfg);
    errors.extend(check_walk(table, cfg));
    ValidationReport::new(errors, check_completeness(table, cfg))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDiff {
    pub movement: MovementId,
    pub second: u32,
    pub expected: i8,
    pub got: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub correct: bool,
    /// `cycle-mismatch` when the cycle lengths differ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub expected_cycle: u32,
    pub actual_cycle: u32,
    pub diffs: Vec<CellDiff>,
    pub missing_rows: Vec<MovementId>,
    pub extra_rows: Vec<MovementId>,
}

pub const CYCLE_MISMATCH: &str = "cycle-mismatch";

/// Exact-match comparison: same rows, same code every second.
pub fn compare_to_golden(actual: &ColorTable, golden: &ColorTable) -> MatchReport {
    let missing_rows: Vec<MovementId> = golden
        .rows
        .keys()
        .filter(|m| !actual.rows.contains_key(m))
        .copied()
        .collect();
    let extra_rows: Vec<MovementId> = actual
        .rows
        .keys()
        .filter(|m| !golden.rows.contains_key(m))
        .copied()
        .collect();
    let cycle_ok = actual.cycle == golden.cycle;
    let mut diffs = Vec::new();
    if cycle_ok {
        for (m, expected) in &golden.rows {
            let Some(got) = actual.rows.get(m) else {
                continue;
            };
            for (t, (&e, &g)) in expected.iter().zip(got).enumerate() {
                if e != g {
                    diffs.push(CellDiff {
                        movement: *m,
                        second: t as u32,
                        expected: e,
                        got: g,
                    });
                }
            }
        }
    }
    MatchReport {
        correct: cycle_ok && diffs.is_empty() && missing_rows.is_empty() && extra_rows.is_empty(),
        code: (!cycle_ok).then(|| CYCLE_MISMATCH.to_owned()),
        expected_cycle: golden.cycle,
        actual_cycle: actual.cycle,
        diffs,
        missing_rows,
        extra_rows,
    }
}
