//! Locating major and standalone phases in the cycle.
//!
//! Structure nodes are first laid out on a linear time axis starting at 0;
//! the cycle length is the largest linear end, and every interval is then
//! folded onto the cycle. Standalone records place themselves from their own
//! start/end (or green start/end) times and take precedence over the
//! structural occurrence with the same `(phase, phaseOrder)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::IntersectionConfig;
use crate::diagnostic::Diagnostic;
use crate::movement::MovementId;
use crate::plan_ir::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimingError {
    #[error("split {split} s exceeds the {cycle} s cycle")]
    SplitExceedsCycle { split: u32, cycle: u32 },
    #[error("{phase}#{order}: interval would be empty or cover the whole cycle")]
    DegenerateInterval { phase: String, order: u32 },
    #[error("no structure, no cycle length and no standalone times to derive one from")]
    EmptyStructureNoCycle,
    #[error("no cycle length available")]
    NoCycleLength,
    #[error("{phase}#{order}: {message}")]
    UnderSpecified {
        phase: String,
        order: u32,
        message: String,
    },
    #[error("{phase}#{order}: split {split} s is shorter than its {needed} s of inter-green")]
    SplitTooShort {
        phase: String,
        order: u32,
        split: u32,
        needed: u32,
    },
    #[error("{phase}#{order}: green flash {flash} s exceeds green {green} s")]
    GreenFlashExceedsGreen {
        phase: String,
        order: u32,
        flash: u32,
        green: u32,
    },
    #[error("{phase}#{order}: time {time} s lies outside the {cycle} s cycle")]
    OutOfCycle {
        phase: String,
        order: u32,
        time: u32,
        cycle: u32,
    },
    #[error("{phase}#{order}: no structural position, times or parent to locate it")]
    Unlocatable { phase: String, order: u32 },
    #[error("`{0}` is not a canonical phase name; cleanse the plan first")]
    NotCanonical(String),
    #[error("structure node result1[{0}] has an unrecognized shape")]
    UnrecognizedStructure(usize),
}

impl TimingError {
    pub fn code(&self) -> &'static str {
        match self {
            TimingError::SplitExceedsCycle { .. } => "split-exceeds-cycle",
            TimingError::DegenerateInterval { .. } => "degenerate-interval",
            TimingError::EmptyStructureNoCycle => "empty-structure-no-cycle",
            TimingError::NoCycleLength => "no-cycle-length",
            TimingError::UnderSpecified { .. } => "under-specified",
            TimingError::SplitTooShort { .. } => "split-too-short",
            TimingError::GreenFlashExceedsGreen { .. } => "green-flash-exceeds-green",
            TimingError::OutOfCycle { .. } => "out-of-cycle",
            TimingError::Unlocatable { .. } => "unlocatable",
            TimingError::NotCanonical(_) => "not-canonical",
            TimingError::UnrecognizedStructure(_) => "unrecognized-structure",
        }
    }
}

/// Timing parameters of one split, in seconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct SplitParams {
    pub late_start: u32,
    pub red_amber: u32,
    pub green: u32,
    pub yellow: u32,
    pub all_red: u32,
    pub early_cut_off: u32,
    /// Trailing part of `green` shown flashing.
    pub green_flash: u32,
}

impl SplitParams {
    /// Everything in the split except green.
    pub fn inter_green(&self) -> u32 {
        self.late_start + self.red_amber + self.yellow + self.all_red + self.early_cut_off
    }

    pub fn split(&self) -> u32 {
        split_from_green(self)
    }
}

/// S = LS + RA + G + Y + AR + EC
pub fn split_from_green(p: &SplitParams) -> u32 {
    p.late_start + p.red_amber + p.green + p.yellow + p.all_red + p.early_cut_off
}

/// End of a split starting at `start`; a split ending exactly at the cycle
/// boundary ends at `cycle`, never 0.
pub fn wrap_end(start: u32, split: u32, cycle: u32) -> Result<u32, TimingError> {
    if split > cycle {
        return Err(TimingError::SplitExceedsCycle { split, cycle });
    }
    let sum = start + split;
    Ok(if sum == cycle { cycle } else { sum % cycle })
}

/// A half-open span of seconds on a cycle of length `cycle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CycleInterval {
    pub start: u32,
    pub end: u32,
    pub cycle: u32,
}

impl CycleInterval {
    pub fn new(start: u32, end: u32, cycle: u32) -> Option<Self> {
        (start < cycle && end > 0 && end <= cycle && start != end).then_some(CycleInterval {
            start,
            end,
            cycle,
        })
    }

    pub fn full(cycle: u32) -> Self {
        CycleInterval {
            start: 0,
            end: cycle,
            cycle,
        }
    }

    /// Interval of `len` seconds from `start`; a full-length interval is
    /// always `[0, cycle)`.
    pub fn from_start_len(start: u32, len: u32, cycle: u32) -> Option<Self> {
        if len == 0 || len > cycle || start >= cycle {
            return None;
        }
        if len == cycle {
            return Some(Self::full(cycle));
        }
        let end = wrap_end(start, len, cycle).ok()?;
        Self::new(start, end, cycle)
    }

    pub fn len(&self) -> u32 {
        if self.end > self.start {
            self.end - self.start
        } else {
            self.cycle - self.start + self.end
        }
    }

    /// Intervals are never empty; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wraps(&self) -> bool {
        self.start > self.end
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.cycle
    }

    pub fn contains(&self, t: u32) -> bool {
        if self.wraps() {
            t >= self.start || t < self.end
        } else {
            t >= self.start && t < self.end
        }
    }

    /// Seconds in order from `start`.
    pub fn seconds(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len()).map(move |k| (self.start + k) % self.cycle)
    }

    /// The interval as one or two linear pieces `[a, b)`.
    pub fn pieces(&self) -> Vec<(u32, u32)> {
        if self.wraps() {
            vec![(self.start, self.cycle), (0, self.end)]
        } else {
            vec![(self.start, self.end)]
        }
    }
}

/// Split interval from green start/end: the split opens LS + RA before
/// green and closes Y + AR + EC after it.
pub fn green_times_to_split_interval(
    green_start: u32,
    green_end: u32,
    p: &SplitParams,
    cycle: u32,
) -> Result<CycleInterval, TimingError> {
    let degenerate = || TimingError::DegenerateInterval {
        phase: String::new(),
        order: 0,
    };
    if cycle == 0 {
        return Err(degenerate());
    }
    let c = i64::from(cycle);
    let start = (i64::from(green_start) - i64::from(p.late_start) - i64::from(p.red_amber))
        .rem_euclid(c) as u32;
    let raw_end = (i64::from(green_end)
        + i64::from(p.yellow)
        + i64::from(p.all_red)
        + i64::from(p.early_cut_off))
    .rem_euclid(c) as u32;
    let end = if raw_end == 0 { cycle } else { raw_end };
    let len = (i64::from(end) - i64::from(start)).rem_euclid(c);
    if len == 0 {
        return Err(degenerate());
    }
    CycleInterval::new(start, end, cycle).ok_or_else(degenerate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Major,
    Standalone,
    Overlapped,
}

/// A phase occurrence located in the cycle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlacedPhase {
    pub phase: MovementId,
    pub phase_order: u32,
    pub interval: CycleInterval,
    pub params: SplitParams,
    pub kind: PhaseKind,
    pub permissive: bool,
    pub prohibited: bool,
    /// Flashing don't-walk seconds; pedestrian phases only.
    pub ped_clear: u32,
}

/// Placement of the major and standalone phases of a cleansed plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub cycle: u32,
    pub phases: Vec<PlacedPhase>,
    /// Records still to be located through their parent phase.
    pub overlapped: Vec<AttributeRecord>,
    pub warnings: Vec<Diagnostic>,
}

fn movement(name: &str) -> Result<MovementId, TimingError> {
    match name.parse::<MovementId>() {
        Ok(MovementId::AllPed) | Err(_) => Err(TimingError::NotCanonical(name.to_owned())),
        Ok(m) => Ok(m),
    }
}

/// Change-interval parameters of a phase occurrence before its green is
/// known. Pedestrian phases have no yellow or green flash.
pub(crate) fn change_params(
    m: MovementId,
    rec: Option<&AttributeRecord>,
    cfg: &IntersectionConfig,
) -> SplitParams {
    let ig = &cfg.inter_green;
    let get =
        |f: fn(&AttributeRecord) -> Option<u32>, default: u32| rec.and_then(f).unwrap_or(default);
    if rec.is_some_and(|r| r.is_permissive || r.is_prohibited) {
        return SplitParams::default();
    }
    if m.is_pedestrian() {
        return SplitParams {
            late_start: get(|r| r.late_start, ig.late_start),
            red_amber: get(|r| r.red_amber, 0),
            green: 0,
            yellow: 0,
            all_red: get(|r| r.all_red, 0),
            early_cut_off: get(|r| r.early_cut_off, ig.early_cut_off),
            green_flash: 0,
        };
    }
    SplitParams {
        late_start: get(|r| r.late_start, ig.late_start),
        red_amber: get(|r| r.red_amber, ig.red_amber),
        green: 0,
        yellow: get(|r| r.yellow, ig.yellow),
        all_red: get(|r| r.all_red, ig.all_red),
        early_cut_off: get(|r| r.early_cut_off, ig.early_cut_off),
        green_flash: get(|r| r.green_flash, ig.green_flash),
    }
}

pub(crate) fn ped_clear_for(
    m: MovementId,
    rec: Option<&AttributeRecord>,
    cfg: &IntersectionConfig,
    inherited: u32,
) -> u32 {
    if !m.is_pedestrian() {
        return 0;
    }
    rec.and_then(|r| r.ped_clear)
        .or(cfg.ped_clear)
        .unwrap_or(inherited)
}

/// Fills in green so the split totals `split` seconds.
fn with_split(
    mut p: SplitParams,
    split: u32,
    phase: &str,
    order: u32,
) -> Result<SplitParams, TimingError> {
    let needed = p.inter_green();
    if split < needed {
        return Err(TimingError::SplitTooShort {
            phase: phase.to_owned(),
            order,
            split,
            needed,
        });
    }
    p.green = split - needed;
    check_flash(p, phase, order)
}

fn check_flash(p: SplitParams, phase: &str, order: u32) -> Result<SplitParams, TimingError> {
    if p.green_flash > p.green {
        return Err(TimingError::GreenFlashExceedsGreen {
            phase: phase.to_owned(),
            order,
            flash: p.green_flash,
            green: p.green,
        });
    }
    Ok(p)
}

/// A structural occurrence on the linear time axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSlot {
    pub phase: String,
    pub order: u32,
    pub start: u32,
    pub end: u32,
}

struct Layout<'a> {
    attrs: &'a [AttributeRecord],
    cfg: &'a IntersectionConfig,
    counts: BTreeMap<String, u32>,
    slots: Vec<(LinearSlot, SplitParams)>,
}

impl Layout<'_> {
    fn entry(&mut self, e: &PhaseEntry, start: u32) -> Result<u32, TimingError> {
        let m = movement(&e.phase)?;
        let order = {
            let c = self.counts.entry(e.phase.clone()).or_insert(0);
            *c += 1;
            *c
        };
        let rec = self
            .attrs
            .iter()
            .find(|r| r.phase == e.phase && r.phase_order == order);
        let base = change_params(m, rec, self.cfg);
        let params = match e.duration {
            Duration::Split(s) if rec.is_some_and(|r| r.is_permissive || r.is_prohibited) => {
                SplitParams { green: s, ..base }
            }
            Duration::Split(s) => with_split(base, s, &e.phase, order)?,
            Duration::GreenTime(g) => {
                check_flash(SplitParams { green: g, ..base }, &e.phase, order)?
            }
        };
        let end = start + params.split();
        self.slots.push((
            LinearSlot {
                phase: e.phase.clone(),
                order,
                start,
                end,
            },
            params,
        ));
        Ok(end)
    }

    fn stage(&mut self, stage: &Stage, start: u32) -> Result<u32, TimingError> {
        let mut end = start;
        for e in stage {
            end = end.max(self.entry(e, start)?);
        }
        Ok(end)
    }

    fn stages(&mut self, stages: &[Stage], start: u32) -> Result<u32, TimingError> {
        let mut cursor = start;
        for s in stages {
            cursor = self.stage(s, cursor)?;
        }
        Ok(cursor)
    }

    fn ring(&mut self, ring: &Ring, start: u32) -> Result<u32, TimingError> {
        let mut cursor = start;
        for el in ring {
            cursor = match el {
                RingElement::Phase(p) => self.entry(p, cursor)?,
                RingElement::Stages(block) => self.stages(block, cursor)?,
            };
        }
        Ok(cursor)
    }

    fn sequential(&mut self, ring: &[PhaseEntry], start: u32) -> Result<u32, TimingError> {
        let mut cursor = start;
        for e in ring {
            cursor = self.entry(e, cursor)?;
        }
        Ok(cursor)
    }

    fn node(&mut self, idx: usize, node: &StructureNode, start: u32) -> Result<u32, TimingError> {
        match node {
            StructureNode::Stages(items) => {
                let mut cursor = start;
                for item in items {
                    cursor = match item {
                        StageItem::Stage(s) => self.stage(s, cursor)?,
                        StageItem::Rings(rings) => {
                            let mut end = cursor;
                            for r in rings {
                                end = end.max(self.sequential(r, cursor)?);
                            }
                            end
                        }
                    };
                }
                Ok(cursor)
            }
            StructureNode::Rings(rings) => {
                let mut end = start;
                for r in rings {
                    end = end.max(self.ring(r, start)?);
                }
                Ok(end)
            }
            StructureNode::FlatRing(r) => self.ring(r, start),
            StructureNode::Unlabeled(items) => {
                let mut cursor = start;
                for item in items {
                    cursor = match item {
                        UnlabeledItem::Phase(p) => self.entry(p, cursor)?,
                        UnlabeledItem::Stage(s) => self.stage(s, cursor)?,
                    };
                }
                Ok(cursor)
            }
            StructureNode::Unrecognized(_) => Err(TimingError::UnrecognizedStructure(idx)),
        }
    }
}

/// Linear layout of the structure: slots with resolved params, and the end
/// of the last node.
pub fn layout_linear(
    sequence: &[StructureNode],
    attrs: &[AttributeRecord],
    cfg: &IntersectionConfig,
) -> Result<(Vec<(LinearSlot, SplitParams)>, u32), TimingError> {
    let mut layout = Layout {
        attrs,
        cfg,
        counts: BTreeMap::new(),
        slots: Vec::new(),
    };
    let mut cursor = 0;
    for (i, node) in sequence.iter().enumerate() {
        cursor = layout.node(i, node, cursor)?;
    }
    Ok((layout.slots, cursor))
}

/// Chooses the cycle length: the structural one when present, otherwise the
/// declared one.
pub fn resolve_cycle_length(
    structure_c: Option<u32>,
    declared_c: Option<u32>,
) -> Result<(u32, Vec<Diagnostic>), TimingError> {
    match (structure_c, declared_c) {
        (Some(s), Some(d)) if s != d => Ok((
            s,
            vec![Diagnostic::warning(
                "cycle-length-mismatch",
                "result3",
                format!("declared cycle {d} s differs from the {s} s implied by the phase sequence; using {s} s"),
            )],
        )),
        (Some(s), _) => Ok((s, Vec::new())),
        (None, Some(d)) => Ok((d, Vec::new())),
        (None, None) => Err(TimingError::NoCycleLength),
    }
}

/// Majors laid out from the structure and folded onto the cycle.
pub fn place_structure(
    sequence: &[StructureNode],
    attrs: &[AttributeRecord],
    declared_c: Option<u32>,
    cfg: &IntersectionConfig,
) -> Result<(Vec<PlacedPhase>, u32, Vec<Diagnostic>), TimingError> {
    let (slots, end) = layout_linear(sequence, attrs, cfg)?;
    let structure_c = (end > 0).then_some(end);
    let (cycle, warnings) = match resolve_cycle_length(structure_c, declared_c) {
        Ok(r) => r,
        Err(_) => match standalone_cycle_hint(attrs, cfg) {
            Some(c) => (
                c,
                vec![Diagnostic::warning(
                    "cycle-length-derived",
                    "result3",
                    format!("no phase sequence or cycle length; using {c} s from standalone times"),
                )],
            ),
            None => return Err(TimingError::EmptyStructureNoCycle),
        },
    };
    let mut placed = Vec::with_capacity(slots.len());
    for (slot, params) in slots {
        let m = movement(&slot.phase)?;
        let rec = attrs
            .iter()
            .find(|r| r.phase == slot.phase && r.phase_order == slot.order);
        let len = slot.end - slot.start;
        let interval = CycleInterval::from_start_len(slot.start % cycle, len, cycle)
            .ok_or(TimingError::SplitExceedsCycle { split: len, cycle })?;
        placed.push(PlacedPhase {
            phase: m,
            phase_order: slot.order,
            interval,
            params,
            kind: PhaseKind::Major,
            permissive: rec.is_some_and(|r| r.is_permissive),
            prohibited: rec.is_some_and(|r| r.is_prohibited),
            ped_clear: ped_clear_for(m, rec, cfg, 0),
        });
    }
    Ok((placed, cycle, warnings))
}

/// Largest end time implied by standalone records, for plans without any
/// other source of a cycle length.
fn standalone_cycle_hint(attrs: &[AttributeRecord], cfg: &IntersectionConfig) -> Option<u32> {
    let mut best = 0;
    for r in attrs {
        let Ok(m) = movement(&r.phase) else { continue };
        let p = change_params(m, Some(r), cfg);
        let candidates = [
            match r.end_time {
                Some(EndTime::At(e)) => Some(e),
                _ => None,
            },
            r.start_time.zip(r.split).map(|(s, d)| s + d),
            r.start_time
                .zip(r.green_time)
                .map(|(s, g)| s + SplitParams { green: g, ..p }.split()),
            r.green_end
                .map(|g| g + p.yellow + p.all_red + p.early_cut_off),
        ];
        best = candidates.into_iter().flatten().fold(best, u32::max);
    }
    (best > 0).then_some(best)
}

fn has_timing_keys(r: &AttributeRecord) -> bool {
    r.start_time.is_some()
        || r.end_time.is_some()
        || r.green_start.is_some()
        || r.green_end.is_some()
}

/// Places one standalone record; `None` when it carries no times at all.
fn place_standalone_record(
    r: &AttributeRecord,
    cycle: u32,
    cfg: &IntersectionConfig,
) -> Result<Option<PlacedPhase>, TimingError> {
    if !has_timing_keys(r) {
        return Ok(None);
    }
    let m = movement(&r.phase)?;
    let order = r.phase_order;
    let base = change_params(m, Some(r), cfg);
    let out_of_cycle = |time: u32| TimingError::OutOfCycle {
        phase: r.phase.clone(),
        order,
        time,
        cycle,
    };
    let degenerate = || TimingError::DegenerateInterval {
        phase: r.phase.clone(),
        order,
    };
    let flagged = r.is_permissive || r.is_prohibited;
    let from_len = |interval: CycleInterval| -> Result<SplitParams, TimingError> {
        if flagged {
            Ok(SplitParams {
                green: interval.len(),
                ..base
            })
        } else {
            with_split(base, interval.len(), &r.phase, order)
        }
    };

    let (interval, params) = if let (Some(s), Some(e)) = (r.start_time, r.end_time) {
        if s >= cycle {
            return Err(out_of_cycle(s));
        }
        let e = match e {
            EndTime::CycleLength => cycle,
            EndTime::At(0) => cycle,
            EndTime::At(e) if e > cycle => return Err(out_of_cycle(e)),
            EndTime::At(e) => e,
        };
        let interval = if s == e % cycle {
            CycleInterval::full(cycle)
        } else {
            CycleInterval::new(s, e, cycle).ok_or_else(degenerate)?
        };
        (interval, from_len(interval)?)
    } else if let (Some(s), Some(d)) = (r.start_time, r.split) {
        if s >= cycle {
            return Err(out_of_cycle(s));
        }
        wrap_end(s, d, cycle)?;
        let interval = CycleInterval::from_start_len(s, d, cycle).ok_or_else(degenerate)?;
        (interval, from_len(interval)?)
    } else if let (Some(s), Some(g)) = (r.start_time, r.green_time) {
        if s >= cycle {
            return Err(out_of_cycle(s));
        }
        let params = check_flash(SplitParams { green: g, ..base }, &r.phase, order)?;
        let split = params.split();
        wrap_end(s, split, cycle)?;
        (
            CycleInterval::from_start_len(s, split, cycle).ok_or_else(degenerate)?,
            params,
        )
    } else if let (Some(gs), Some(ge)) = (r.green_start, r.green_end) {
        if gs >= cycle {
            return Err(out_of_cycle(gs));
        }
        if ge > cycle {
            return Err(out_of_cycle(ge));
        }
        let interval =
            green_times_to_split_interval(gs, ge, &base, cycle).map_err(|_| degenerate())?;
        let green = (i64::from(ge) - i64::from(gs)).rem_euclid(i64::from(cycle)) as u32;
        let params = check_flash(SplitParams { green, ..base }, &r.phase, order)?;
        (interval, params)
    } else {
        let message = if r.start_time.is_some() {
            "startTime needs endTime, split or greenTime"
        } else if r.end_time.is_some() {
            "endTime needs startTime"
        } else if r.green_start.is_some() {
            "greenStart needs greenEnd"
        } else {
            "greenEnd needs greenStart"
        };
        return Err(TimingError::UnderSpecified {
            phase: r.phase.clone(),
            order,
            message: message.into(),
        });
    };

    Ok(Some(PlacedPhase {
        phase: m,
        phase_order: order,
        interval,
        params,
        kind: PhaseKind::Standalone,
        permissive: r.is_permissive,
        prohibited: r.is_prohibited,
        ped_clear: ped_clear_for(m, Some(r), cfg, 0),
    }))
}

/// Places every record that carries its own times.
pub fn place_standalone(
    attrs: &[AttributeRecord],
    cycle: u32,
    cfg: &IntersectionConfig,
) -> Result<Vec<PlacedPhase>, TimingError> {
    let mut out = Vec::new();
    for r in attrs {
        if let Some(p) = place_standalone_record(r, cycle, cfg)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Places all majors and standalone phases of a cleansed plan and collects
/// the records left for overlap resolution.
pub fn place(ir: &PlanIR, cfg: &IntersectionConfig) -> Result<Placement, TimingError> {
    let (majors, cycle, mut warnings) =
        place_structure(&ir.sequence, &ir.attributes, ir.cycle_length, cfg)?;
    let standalone = place_standalone(&ir.attributes, cycle, cfg)?;
    let located: BTreeSet<(MovementId, u32)> = standalone
        .iter()
        .map(|p| (p.phase, p.phase_order))
        .collect();

    let mut phases: Vec<PlacedPhase> = Vec::new();
    for p in majors {
        if located.contains(&(p.phase, p.phase_order)) {
            warnings.push(Diagnostic::info(
                "standalone-overrides-structure",
                format!("{}#{}", p.phase, p.phase_order),
                "explicit times take precedence over the structural position",
            ));
        } else {
            phases.push(p);
        }
    }
    let structural: BTreeSet<(MovementId, u32)> =
        phases.iter().map(|p| (p.phase, p.phase_order)).collect();
    phases.extend(standalone);

    let mut overlapped = Vec::new();
    for r in &ir.attributes {
        let m = movement(&r.phase)?;
        let key = (m, r.phase_order);
        if located.contains(&key) {
            continue;
        }
        if structural.contains(&key) {
            if r.parent_phase.is_some() {
                warnings.push(Diagnostic::warning(
                    "parent-ignored",
                    format!("{}#{}", r.phase, r.phase_order),
                    "phase is placed by the phase sequence; parentPhase ignored",
                ));
            }
            continue;
        }
        if r.parent_phase.is_some() {
            overlapped.push(r.clone());
        } else if r.is_permissive || r.is_prohibited {
            phases.push(PlacedPhase {
                phase: m,
                phase_order: r.phase_order,
                interval: CycleInterval::full(cycle),
                params: SplitParams {
                    green: cycle,
                    ..Default::default()
                },
                kind: PhaseKind::Standalone,
                permissive: r.is_permissive,
                prohibited: r.is_prohibited,
                ped_clear: 0,
            });
        } else {
            return Err(TimingError::Unlocatable {
                phase: r.phase.clone(),
                order: r.phase_order,
            });
        }
    }
    Ok(Placement {
        cycle,
        phases,
        overlapped,
        warnings,
    })
}
