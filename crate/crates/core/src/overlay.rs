//! Overlapped phases and merging of connected occurrences.
//!
//! An overlapped phase shares the split of its parent occurrence(s) and
//! inherits the parent's green flash and change intervals, keeping its own
//! late start and early cut-off. Occurrences of one phase that touch or
//! overlap in time are then merged into a single occurrence, unless a late
//! start or early cut-off puts red between them.

use std::collections::BTreeMap;

use crate::config::IntersectionConfig;
use crate::diagnostic::Diagnostic;
use crate::movement::MovementId;
use crate::plan_ir::{AttributeRecord, ParentRef};
use crate::timing::{ped_clear_for, CycleInterval, PhaseKind, PlacedPhase, SplitParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverlayError {
    #[error("{phase}#{order}: parent phase {parent} is not a major or standalone phase")]
    ParentNotFound {
        phase: String,
        order: u32,
        parent: String,
    },
    #[error("{phase}#{order}: parent {parent} has no occurrence {overlap_num}")]
    ParentOccurrenceMissing {
        phase: String,
        order: u32,
        parent: String,
        overlap_num: u32,
    },
    #[error("{phase}#{order}: parent split of {split} s cannot hold {needed} s of inter-green")]
    SplitTooShort {
        phase: String,
        order: u32,
        split: u32,
        needed: u32,
    },
    #[error("{phase}#{order}: parent placeholder was not resolved")]
    UnresolvedDefault { phase: String, order: u32 },
    #[error("occurrences of {phase} form {runs} separate runs after merging")]
    NonContiguousComponent { phase: String, runs: usize },
    #[error("`{0}` is not a canonical phase name")]
    NotCanonical(String),
}

impl OverlayError {
    pub fn code(&self) -> &'static str {
        match self {
            OverlayError::ParentNotFound { .. } => "parent-not-found",
            OverlayError::ParentOccurrenceMissing { .. } => "parent-occurrence-missing",
            OverlayError::SplitTooShort { .. } => "split-too-short",
            OverlayError::UnresolvedDefault { .. } => "unresolved-default",
            OverlayError::NonContiguousComponent { .. } => "non-contiguous-component",
            OverlayError::NotCanonical(_) => "not-canonical",
        }
    }
}

/// Places each overlapped record on its parent occurrence(s).
pub fn resolve_overlaps(
    placed: &[PlacedPhase],
    records: &[AttributeRecord],
    cfg: &IntersectionConfig,
) -> Result<(Vec<PlacedPhase>, Vec<Diagnostic>), OverlayError> {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for r in records {
        let child: MovementId = r
            .phase
            .parse()
            .map_err(|_| OverlayError::NotCanonical(r.phase.clone()))?;
        let parent_name = match &r.parent_phase {
            Some(ParentRef::Phase(p)) => p,
            Some(ParentRef::Default) => {
                return Err(OverlayError::UnresolvedDefault {
                    phase: r.phase.clone(),
                    order: r.phase_order,
                })
            }
            None => continue,
        };
        let parent: MovementId = parent_name
            .parse()
            .map_err(|_| OverlayError::NotCanonical(parent_name.clone()))?;
        let candidates: Vec<&PlacedPhase> = placed
            .iter()
            .filter(|p| p.phase == parent && p.kind != PhaseKind::Overlapped)
            .collect();
        if candidates.is_empty() {
            return Err(OverlayError::ParentNotFound {
                phase: r.phase.clone(),
                order: r.phase_order,
                parent: parent_name.clone(),
            });
        }
        let selected: Vec<&PlacedPhase> = match r.overlap_num {
            None | Some(0) => candidates,
            Some(n) => {
                let hit: Vec<_> = candidates
                    .into_iter()
                    .filter(|p| p.phase_order == n)
                    .collect();
                if hit.is_empty() {
                    return Err(OverlayError::ParentOccurrenceMissing {
                        phase: r.phase.clone(),
                        order: r.phase_order,
                        parent: parent_name.clone(),
                        overlap_num: n,
                    });
                }
                hit
            }
        };

        let loc = format!("{}#{}", r.phase, r.phase_order);
        let first = selected[0];
        let inherited = [
            ("yellow", r.yellow, first.params.yellow),
            ("greenFlash", r.green_flash, first.params.green_flash),
            ("redAmber", r.red_amber, first.params.red_amber),
            ("allRed", r.all_red, first.params.all_red),
        ];
        for (key, own, from_parent) in inherited {
            if own.is_some_and(|v| v != from_parent) {
                warnings.push(Diagnostic::warning(
                    "inherited-attribute",
                    &loc,
                    format!(
                        "{key} is inherited from parent {parent}; the record's value is ignored"
                    ),
                ));
            }
        }

        for p in selected {
            out.push(overlapped_occurrence(child, r, p, cfg)?);
        }
    }
    Ok((out, warnings))
}

fn overlapped_occurrence(
    child: MovementId,
    r: &AttributeRecord,
    parent: &PlacedPhase,
    cfg: &IntersectionConfig,
) -> Result<PlacedPhase, OverlayError> {
    let len = parent.interval.len();
    let ig = &cfg.inter_green;
    let pp = &parent.params;
    let mut params = if r.is_permissive || r.is_prohibited {
        SplitParams::default()
    } else if child.is_pedestrian() {
        // no yellow or flash for pedestrians; parent red/amber shows as red
        // unless the crossing sets its own late start
        SplitParams {
            late_start: r.late_start.unwrap_or(ig.late_start),
            red_amber: if r.late_start.is_some() {
                0
            } else {
                pp.red_amber
            },
            green: 0,
            yellow: 0,
            all_red: 0,
            early_cut_off: r.early_cut_off.unwrap_or(ig.early_cut_off),
            green_flash: 0,
        }
    } else {
        SplitParams {
            late_start: r.late_start.unwrap_or(ig.late_start),
            red_amber: pp.red_amber,
            green: 0,
            yellow: pp.yellow,
            all_red: pp.all_red,
            early_cut_off: r.early_cut_off.unwrap_or(ig.early_cut_off),
            green_flash: pp.green_flash,
        }
    };
    let needed = params.inter_green();
    if len < needed {
        return Err(OverlayError::SplitTooShort {
            phase: r.phase.clone(),
            order: r.phase_order,
            split: len,
            needed,
        });
    }
    params.green = len - needed;
    if params.green_flash > params.green {
        params.green_flash = params.green;
    }
    Ok(PlacedPhase {
        phase: child,
        phase_order: r.phase_order,
        interval: parent.interval,
        params,
        kind: PhaseKind::Overlapped,
        permissive: r.is_permissive,
        prohibited: r.is_prohibited,
        ped_clear: ped_clear_for(child, Some(r), cfg, pp.yellow + pp.all_red),
    })
}

/// The interval as linear pieces: itself, or `[start, C)` and `[0, end)`
/// when it wraps.
pub fn split_wraparound(interval: &CycleInterval) -> Vec<(u32, u32)> {
    interval.pieces()
}

fn shares_second(a: &CycleInterval, b: &CycleInterval) -> bool {
    a.pieces()
        .iter()
        .any(|&(s1, e1)| b.pieces().iter().any(|&(s2, e2)| s1 < e2 && s2 < e1))
}

/// `a` ends exactly where `b` starts, with no inserted red in between.
fn flows_into(a: &PlacedPhase, b: &PlacedPhase) -> bool {
    let c = a.interval.cycle;
    a.interval.end % c == b.interval.start
        && a.params.early_cut_off == 0
        && b.params.late_start == 0
}

fn connected(a: &PlacedPhase, b: &PlacedPhase) -> bool {
    if a.prohibited || b.prohibited || a.permissive != b.permissive {
        return false;
    }
    shares_second(&a.interval, &b.interval) || flows_into(a, b) || flows_into(b, a)
}

/// Merges connected occurrences of one phase. Output is sorted and does not
/// depend on input order.
pub fn merge_connected(
    occurrences: &[PlacedPhase],
    cycle: u32,
) -> Result<Vec<PlacedPhase>, OverlayError> {
    let mut occ = occurrences.to_vec();
    occ.sort();
    let n = occ.len();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        component[root] = count;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if component[j] == usize::MAX && connected(&occ[i], &occ[j]) {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }

    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let members: Vec<&PlacedPhase> = (0..n)
            .filter(|&i| component[i] == k)
            .map(|i| &occ[i])
            .collect();
        if members.len() == 1 {
            out.push(members[0].clone());
            continue;
        }
        out.push(merge_component(&members, cycle)?);
    }
    out.sort_by(|a, b| {
        (a.phase, a.interval.start, a.phase_order).cmp(&(b.phase, b.interval.start, b.phase_order))
    });
    Ok(out)
}

fn merge_component(members: &[&PlacedPhase], cycle: u32) -> Result<PlacedPhase, OverlayError> {
    let c = cycle as usize;
    let mut covered = vec![false; c];
    for m in members {
        for t in m.interval.seconds() {
            covered[t as usize] = true;
        }
    }
    let lead = members[0];
    let phase_order = members
        .iter()
        .map(|m| m.phase_order)
        .min()
        .unwrap_or(lead.phase_order);
    if covered.iter().all(|&x| x) {
        return Ok(PlacedPhase {
            interval: CycleInterval::full(cycle),
            params: SplitParams {
                green: cycle,
                ..Default::default()
            },
            phase_order,
            ..lead.clone()
        });
    }
    let starts: Vec<usize> = (0..c)
        .filter(|&t| covered[t] && !covered[(t + c - 1) % c])
        .collect();
    if starts.len() != 1 {
        return Err(OverlayError::NonContiguousComponent {
            phase: lead.phase.to_string(),
            runs: starts.len(),
        });
    }
    let start = starts[0] as u32;
    let len = (0..c).take_while(|k| covered[(starts[0] + k) % c]).count() as u32;
    let interval = CycleInterval::from_start_len(start, len, cycle).expect("run inside the cycle");
    let end = interval.end % cycle;

    // first member: starts the run (longest wins a tie); last: ends it
    let first = members
        .iter()
        .filter(|m| m.interval.start == start)
        .max_by_key(|m| (m.interval.len(), std::cmp::Reverse(m.phase_order)))
        .expect("some member starts the run");
    let last = members
        .iter()
        .filter(|m| m.interval.end % cycle == end)
        .max_by_key(|m| (m.interval.len(), std::cmp::Reverse(m.phase_order)))
        .expect("some member ends the run");
    let mut params = SplitParams {
        late_start: first.params.late_start,
        red_amber: first.params.red_amber,
        green: 0,
        yellow: last.params.yellow,
        all_red: last.params.all_red,
        early_cut_off: last.params.early_cut_off,
        green_flash: last.params.green_flash,
    };
    let needed = params.inter_green();
    if len < needed {
        return Err(OverlayError::SplitTooShort {
            phase: lead.phase.to_string(),
            order: phase_order,
            split: len,
            needed,
        });
    }
    params.green = len - needed;
    params.green_flash = params.green_flash.min(params.green);
    Ok(PlacedPhase {
        phase: lead.phase,
        phase_order,
        interval,
        params,
        kind: first.kind,
        permissive: lead.permissive,
        prohibited: false,
        ped_clear: last.ped_clear,
    })
}

/// Resolves overlaps and merges every phase's occurrences.
pub fn overlay(
    placed: &[PlacedPhase],
    overlapped: &[AttributeRecord],
    cycle: u32,
    cfg: &IntersectionConfig,
) -> Result<(Vec<PlacedPhase>, Vec<Diagnostic>), OverlayError> {
    let (children, warnings) = resolve_overlaps(placed, overlapped, cfg)?;
    let mut by_phase: BTreeMap<MovementId, Vec<PlacedPhase>> = BTreeMap::new();
    for p in placed.iter().chain(&children) {
        by_phase.entry(p.phase).or_default().push(p.clone());
    }
    let mut merged = Vec::new();
    for occ in by_phase.values() {
        merged.extend(merge_connected(occ, cycle)?);
    }
    Ok((merged, warnings))
}
