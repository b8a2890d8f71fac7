//! Normalization and repair of a decoded plan: canonical phase names,
//! structural repairs for known malformed shapes, `AllPed` expansion and
//! default pedestrian parents.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use crate::config::IntersectionConfig;
use crate::diagnostic::Diagnostic;
use crate::movement::{Bound, Half, Leg, MovementId, Turn, BOUNDS, LEGS, TURNS};
use crate::plan_ir::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CleanseError {
    #[error("unknown phase `{name}` at {location}")]
    UnknownPhase { name: String, location: String },
    #[error("structure at {location} matches no known shape")]
    StructureUnrepairable { location: String },
    #[error("no default parent configured for {0}")]
    NoDefaultConfigured(String),
    #[error("AllPed inside the ring block at {location} cannot be expanded")]
    AllPedInRingBlock { location: String },
}

impl CleanseError {
    pub fn code(&self) -> &'static str {
        match self {
            CleanseError::UnknownPhase { .. } => "unknown-phase",
            CleanseError::StructureUnrepairable { .. } => "structure-unrepairable",
            CleanseError::NoDefaultConfigured(_) => "no-default-configured",
            CleanseError::AllPedInRingBlock { .. } => "allped-in-ring-block",
        }
    }
}

/// Repair codes reported by [`repair_structure`].
pub const REPAIR_UNLABELED: &str = "repair-unlabeled-stages";
pub const REPAIR_FLAT_RING: &str = "repair-flat-ring";
pub const REPAIR_OVERTHINKING: &str = "repair-overthinking";

/// Runs every cleansing pass in order. Idempotent.
pub fn cleanse(
    ir: &PlanIR,
    cfg: &IntersectionConfig,
) -> Result<(PlanIR, Vec<Diagnostic>), CleanseError> {
    let named = normalize_names(ir, cfg)?;
    let (repaired, notes) = repair_structure(&named)?;
    let expanded = expand_all_ped(&repaired);
    let mut leftover = None;
    for (i, node) in expanded.sequence.iter().enumerate() {
        if let StructureNode::Stages(items) = node {
            for (j, item) in items.iter().enumerate() {
                if let StageItem::Rings(rings) = item {
                    if rings.iter().flatten().any(|e| e.phase == ALL_PED) {
                        leftover.get_or_insert(format!("result1[{i}].stageStyle[{j}]"));
                    }
                }
            }
        }
    }
    if let Some(location) = leftover {
        return Err(CleanseError::AllPedInRingBlock { location });
    }
    let resolved = resolve_ped_defaults(&expanded, cfg)?;
    Ok((resolved, notes))
}

const ALL_PED: &str = "AllPed";

fn fold(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        match c {
            '∅' | 'Ø' | 'ø' | 'Φ' | 'φ' | 'ϕ' | '⌀' => out.push_str("phi"),
            c if c.is_alphanumeric() => out.extend(c.to_lowercase()),
            _ => {}
        }
    }
    out
}

fn builtin_aliases() -> &'static HashMap<String, MovementId> {
    static TABLE: OnceLock<HashMap<String, MovementId>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = HashMap::new();
        let bound_words = |b: Bound| -> Vec<String> {
            let word = b.word();
            let dir = word.trim_end_matches("bound");
            vec![
                word.to_owned(),
                format!("{}b", &dir[..1]),
                format!("{dir}bnd"),
            ]
        };
        let turn_words = |turn: Turn| -> &'static [&'static str] {
            match turn {
                Turn::Left => &["l", "left", "leftturn", "lt"],
                Turn::Through => &["t", "through", "thru", "straight", "th"],
                Turn::Right => &["r", "right", "rightturn", "rt"],
                Turn::UTurn => &["u", "uturn"],
            }
        };
        for b in BOUNDS {
            for turn in TURNS {
                let m = MovementId::vehicle(b, turn);
                for bw in bound_words(b) {
                    for tw in turn_words(turn) {
                        t.insert(format!("{bw}{tw}"), m);
                    }
                }
            }
        }
        for leg in LEGS {
            let word = match leg {
                Leg::North => "north",
                Leg::South => "south",
                Leg::East => "east",
                Leg::West => "west",
            };
            for pw in [
                "ped",
                "pedestrian",
                "peds",
                "pedestriancrossing",
                "crosswalk",
                "approachped",
            ] {
                t.insert(format!("{word}{pw}"), MovementId::ped(leg));
                for (h, hs) in [(Half::A, "a"), (Half::B, "b")] {
                    t.insert(format!("{word}{pw}{hs}"), MovementId::ped_half(leg, h));
                }
            }
        }
        for w in ["dummy", "dummyphase"] {
            t.insert(w.to_owned(), MovementId::Dummy);
        }
        for w in ["allped", "allpeds", "allpedestrian", "exclusiveped"] {
            t.insert(w.to_owned(), MovementId::AllPed);
        }
        t
    })
}

/// Canonical movement for a phase name as written, if any.
pub fn resolve_name(name: &str, cfg: &IntersectionConfig) -> Option<MovementId> {
    if let Ok(m) = name.parse::<MovementId>() {
        return Some(m);
    }
    let folded = fold(name);
    cfg.aliases
        .iter()
        .find(|(k, _)| fold(k) == folded)
        .map(|(_, &m)| m)
        .or_else(|| builtin_aliases().get(&folded).copied())
}

/// Rewrites every phase reference to its canonical name.
pub fn normalize_names(ir: &PlanIR, cfg: &IntersectionConfig) -> Result<PlanIR, CleanseError> {
    let mut out = ir.clone();
    let mut failure = None;
    out.visit_entries_mut(|e| {
        if failure.is_some() {
            return;
        }
        match resolve_name(&e.phase, cfg) {
            Some(m) => e.phase = m.to_string(),
            None => failure = Some(e.phase.clone()),
        }
    });
    if let Some(name) = failure {
        return Err(CleanseError::UnknownPhase {
            name,
            location: "result1".into(),
        });
    }
    for (i, rec) in out.attributes.iter_mut().enumerate() {
        rec.phase = resolve_name(&rec.phase, cfg)
            .ok_or_else(|| CleanseError::UnknownPhase {
                name: rec.phase.clone(),
                location: format!("result2[{i}]"),
            })?
            .to_string();
        if let Some(ParentRef::Phase(p)) = &mut rec.parent_phase {
            *p = resolve_name(p, cfg)
                .ok_or_else(|| CleanseError::UnknownPhase {
                    name: p.clone(),
                    location: format!("result2[{i}].parentPhase"),
                })?
                .to_string();
        }
    }
    Ok(out)
}

/// Repairs the known malformed shapes and reports each repair.
pub fn repair_structure(ir: &PlanIR) -> Result<(PlanIR, Vec<Diagnostic>), CleanseError> {
    let mut notes = Vec::new();
    let mut sequence = Vec::with_capacity(ir.sequence.len());
    for (i, node) in ir.sequence.iter().enumerate() {
        let loc = format!("result1[{i}]");
        sequence.push(match node {
            StructureNode::Unlabeled(items) => {
                notes.push(Diagnostic::info(
                    REPAIR_UNLABELED,
                    &loc,
                    "unlabeled phase list read as stageStyle",
                ));
                StructureNode::Stages(
                    items
                        .iter()
                        .map(|item| match item {
                            UnlabeledItem::Phase(p) => StageItem::Stage(vec![p.clone()]),
                            UnlabeledItem::Stage(s) => StageItem::Stage(s.clone()),
                        })
                        .collect(),
                )
            }
            StructureNode::FlatRing(ring) => {
                notes.push(Diagnostic::info(
                    REPAIR_FLAT_RING,
                    &loc,
                    "ringStyle without the list of rings read as a single ring",
                ));
                StructureNode::Rings(vec![ring.clone()])
            }
            StructureNode::Unrecognized(_) => {
                return Err(CleanseError::StructureUnrepairable { location: loc });
            }
            other => other.clone(),
        });
    }
    let mut attributes = ir.attributes.clone();
    for (i, rec) in attributes.iter_mut().enumerate() {
        let located = rec.start_time.is_some() && rec.end_time.is_some();
        if located && (rec.split.is_some() || rec.green_time.is_some()) {
            notes.push(Diagnostic::info(
                REPAIR_OVERTHINKING,
                format!("result2[{i}].{}", rec.phase),
                "duration ignored because start and end times are given",
            ));
            rec.split = None;
            rec.green_time = None;
        }
    }
    Ok((
        PlanIR {
            sequence,
            attributes,
            cycle_length: ir.cycle_length,
        },
        notes,
    ))
}

fn crossings() -> [String; 4] {
    [Leg::North, Leg::South, Leg::East, Leg::West].map(|l| MovementId::ped(l).to_string())
}

fn expand_entries(entry: &PhaseEntry) -> Vec<PhaseEntry> {
    crossings()
        .into_iter()
        .map(|phase| PhaseEntry {
            phase,
            ..entry.clone()
        })
        .collect()
}

fn expand_stage(stage: &Stage) -> Stage {
    stage
        .iter()
        .flat_map(|e| {
            if e.phase == ALL_PED {
                expand_entries(e)
            } else {
                vec![e.clone()]
            }
        })
        .collect()
}

/// Replaces each `AllPed` with the four one-stage crossings and clones its
/// attribute records, renumbering occurrence indices per crossing.
pub fn expand_all_ped(ir: &PlanIR) -> PlanIR {
    let before = ir.sequence_phases();
    if !before.iter().any(|p| p == ALL_PED) && !ir.attributes.iter().any(|r| r.phase == ALL_PED) {
        return ir.clone();
    }

    let mut sequence = ir.sequence.clone();
    for node in &mut sequence {
        match node {
            StructureNode::Stages(items) => {
                for item in items {
                    if let StageItem::Stage(s) = item {
                        *s = expand_stage(s);
                    }
                }
            }
            StructureNode::Rings(rings) => {
                for ring in rings {
                    for el in ring.iter_mut() {
                        match el {
                            RingElement::Phase(p) if p.phase == ALL_PED => {
                                *el = RingElement::Stages(vec![expand_entries(p)]);
                            }
                            RingElement::Stages(stages) => {
                                for s in stages {
                                    *s = expand_stage(s);
                                }
                            }
                            RingElement::Phase(_) => {}
                        }
                    }
                }
            }
            StructureNode::Unlabeled(items) => {
                for item in items.iter_mut() {
                    match item {
                        UnlabeledItem::Phase(p) if p.phase == ALL_PED => {
                            *item = UnlabeledItem::Stage(expand_entries(p));
                        }
                        UnlabeledItem::Stage(s) => *s = expand_stage(s),
                        UnlabeledItem::Phase(_) => {}
                    }
                }
            }
            StructureNode::FlatRing(ring) => {
                for el in ring.iter_mut() {
                    if let RingElement::Phase(p) = el {
                        if p.phase == ALL_PED {
                            *el = RingElement::Stages(vec![expand_entries(p)]);
                        }
                    }
                }
            }
            StructureNode::Unrecognized(_) => {}
        }
    }

    // Renumber occurrences: walk the old traversal and, per crossing, record
    // where its own occurrences and each expanded AllPed land.
    let after = PlanIR {
        sequence: sequence.clone(),
        ..Default::default()
    }
    .sequence_phases();
    let remaining_allped = after.iter().filter(|p| *p == ALL_PED).count() as u32;
    let allped_struct = before.iter().filter(|p| *p == ALL_PED).count() as u32 - remaining_allped;

    let mut own_map: BTreeMap<(String, u32), u32> = BTreeMap::new();
    let mut allped_map: BTreeMap<(String, u32), u32> = BTreeMap::new();
    for ped in crossings() {
        let mut new_idx = 0;
        let mut own_idx = 0;
        let mut all_idx = 0;
        for name in &before {
            if *name == ped {
                own_idx += 1;
                new_idx += 1;
                own_map.insert((ped.clone(), own_idx), new_idx);
            } else if name == ALL_PED {
                all_idx += 1;
                if all_idx <= allped_struct {
                    new_idx += 1;
                    allped_map.insert((ped.clone(), all_idx), new_idx);
                }
            }
        }
    }

    let mut attributes = Vec::with_capacity(ir.attributes.len());
    let mut clones: Vec<AttributeRecord> = Vec::new();
    for rec in &ir.attributes {
        if rec.phase == ALL_PED && rec.phase_order <= allped_struct {
            for ped in crossings() {
                let mut c = rec.clone();
                c.phase_order = allped_map[&(ped.clone(), rec.phase_order)];
                c.phase = ped;
                attributes.push(c);
            }
        } else if rec.phase == ALL_PED {
            clones.push(rec.clone());
        } else {
            let mut r = rec.clone();
            if crossings().contains(&r.phase) {
                r.phase_order = own_map
                    .get(&(r.phase.clone(), r.phase_order))
                    .copied()
                    .unwrap_or(r.phase_order + allped_struct);
            }
            if let (Some(ParentRef::Phase(p)), Some(k)) = (&r.parent_phase, r.overlap_num) {
                if let Some(&n) = own_map.get(&(p.clone(), k)) {
                    r.overlap_num = Some(n);
                }
            }
            attributes.push(r);
        }
    }
    // located AllPed records beyond the structural ones go after every
    // existing record of each crossing
    for rec in clones {
        for ped in crossings() {
            let top = attributes
                .iter()
                .filter(|r| r.phase == ped)
                .map(|r| r.phase_order)
                .max()
                .unwrap_or(0);
            let mut c = rec.clone();
            c.phase = ped;
            c.phase_order = top + 1;
            attributes.push(c);
        }
    }

    PlanIR {
        sequence,
        attributes,
        cycle_length: ir.cycle_length,
    }
}

/// Substitutes configured parents for `parentPhase: "default"`.
pub fn resolve_ped_defaults(ir: &PlanIR, cfg: &IntersectionConfig) -> Result<PlanIR, CleanseError> {
    let mut attributes: Vec<AttributeRecord> = Vec::with_capacity(ir.attributes.len());
    for (i, rec) in ir.attributes.iter().enumerate() {
        if rec.parent_phase != Some(ParentRef::Default) {
            attributes.push(rec.clone());
            continue;
        }
        let parents = rec
            .phase
            .parse::<MovementId>()
            .ok()
            .and_then(|m| cfg.ped_parents.get(&m))
            .ok_or_else(|| CleanseError::NoDefaultConfigured(rec.phase.clone()))?;
        if parents.len() == 1 {
            let mut r = rec.clone();
            r.parent_phase = Some(ParentRef::Phase(parents[0].to_string()));
            attributes.push(r);
            continue;
        }
        let extra = parents.len() as u32 - 1;
        // later occurrences of this phase move up to make room
        for r in attributes
            .iter_mut()
            .filter(|r| r.phase == rec.phase && r.phase_order > rec.phase_order)
        {
            r.phase_order += extra;
        }
        let shift_later = |r: &mut AttributeRecord| {
            if r.phase == rec.phase && r.phase_order > rec.phase_order {
                r.phase_order += extra;
            }
        };
        for (k, parent) in parents.iter().enumerate() {
            let mut r = rec.clone();
            r.phase_order = rec.phase_order + k as u32;
            r.parent_phase = Some(ParentRef::Phase(parent.to_string()));
            r.overlap_num = Some(0);
            attributes.push(r);
        }
        // records not yet copied are shifted as they are pushed below
        let rest: Vec<AttributeRecord> = ir.attributes[i + 1..].to_vec();
        let tail = resolve_ped_defaults(
            &PlanIR {
                sequence: Vec::new(),
                attributes: rest
                    .into_iter()
                    .map(|mut r| {
                        shift_later(&mut r);
                        r
                    })
                    .collect(),
                cycle_length: None,
            },
            cfg,
        )?;
        attributes.extend(tail.attributes);
        return Ok(PlanIR {
            sequence: ir.sequence.clone(),
            attributes,
            cycle_length: ir.cycle_length,
        });
    }
    Ok(PlanIR {
        sequence: ir.sequence.clone(),
        attributes,
        cycle_length: ir.cycle_length,
    })
}
