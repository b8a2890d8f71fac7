//! The plan intermediate representation.
//!
//! A plan arrives as three results: the phase sequence (`result1`, a list of
//! stage- or ring-style structure nodes holding the major phases), the phase
//! attributes (`result2`, one record per phase occurrence) and the cycle
//! length (`result3`). Phase names are kept as written until the cleansing
//! pass maps them onto canonical [`MovementId`](crate::MovementId)s.
//!
//! Malformed structure shapes that a language model is known to produce are
//! kept as distinct [`StructureNode`] variants so cleansing can repair them
//! and report what it did.

mod lint;
mod parse;
mod serialize;

pub use lint::lint_ir;
pub use parse::{parse_llm_output, IrError, ParseOutput};
pub use serialize::{serialize, serialize_pretty};

use serde_json::{Map, Value};

/// Token accepted in `endTime` meaning "the end of the cycle".
pub const CYCLE_LENGTH_TOKEN: &str = "cycleLength";
/// Token accepted in `parentPhase` meaning "the configured default parent".
pub const DEFAULT_PARENT_TOKEN: &str = "default";

/// Attribute keys understood by the pipeline, in canonical output order.
pub const ATTRIBUTE_KEYS: [&str; 18] = [
    "phaseOrder",
    "split",
    "greenTime",
    "startTime",
    "endTime",
    "greenStart",
    "greenEnd",
    "lateStart",
    "earlyCutOff",
    "yellow",
    "redAmber",
    "allRed",
    "greenFlash",
    "pedClear",
    "parentPhase",
    "overlapNum",
    "isPermissive",
    "isProhibited",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duration {
    Split(u32),
    GreenTime(u32),
}

impl Duration {
    pub fn seconds(self) -> u32 {
        match self {
            Duration::Split(s) | Duration::GreenTime(s) => s,
        }
    }
}

/// A major phase listed in the phase sequence, e.g. `{"NBL": {"split": 21}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEntry {
    pub phase: String,
    pub duration: Duration,
    /// Keys other than `split`/`greenTime`, kept so they survive a round trip.
    pub extra: Map<String, Value>,
}

impl PhaseEntry {
    pub fn split(phase: &str, seconds: u32) -> Self {
        PhaseEntry {
            phase: phase.to_owned(),
            duration: Duration::Split(seconds),
            extra: Map::new(),
        }
    }

    pub fn green(phase: &str, seconds: u32) -> Self {
        PhaseEntry {
            phase: phase.to_owned(),
            duration: Duration::GreenTime(seconds),
            extra: Map::new(),
        }
    }
}

pub type Stage = Vec<PhaseEntry>;
pub type Ring = Vec<RingElement>;

/// An item in a stage-style body: a stage, or a ring block whose rings run
/// side by side and together occupy one slot in the stage sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum StageItem {
    Stage(Stage),
    Rings(Vec<Stage>),
}

/// An element of a ring: a phase, or a nested stage block.
#[derive(Debug, Clone, PartialEq)]
pub enum RingElement {
    Phase(PhaseEntry),
    Stages(Vec<Stage>),
}

/// Item of an unlabeled list found where a structure node was expected.
#[derive(Debug, Clone, PartialEq)]
pub enum UnlabeledItem {
    Phase(PhaseEntry),
    Stage(Stage),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StructureNode {
    /// `{"stageStyle": [...]}`
    Stages(Vec<StageItem>),
    /// `{"ringStyle": [[...], [...]]}`
    Rings(Vec<Ring>),
    /// A bare list without the `stageStyle` label.
    Unlabeled(Vec<UnlabeledItem>),
    /// A `ringStyle` body missing the list-of-rings level.
    FlatRing(Ring),
    /// Anything else; cleansing rejects it.
    Unrecognized(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndTime {
    At(u32),
    CycleLength,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParentRef {
    Phase(String),
    Default,
}

/// Attributes of one phase occurrence (`result2` element).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttributeRecord {
    pub phase: String,
    /// 1-based occurrence index of this phase name within the plan.
    pub phase_order: u32,
    pub split: Option<u32>,
    pub green_time: Option<u32>,
    pub start_time: Option<u32>,
    pub end_time: Option<EndTime>,
    pub green_start: Option<u32>,
    pub green_end: Option<u32>,
    pub late_start: Option<u32>,
    pub early_cut_off: Option<u32>,
    pub yellow: Option<u32>,
    pub red_amber: Option<u32>,
    pub all_red: Option<u32>,
    pub green_flash: Option<u32>,
    pub ped_clear: Option<u32>,
    pub parent_phase: Option<ParentRef>,
    /// Parent occurrence to overlap; `0` or absent selects every occurrence.
    pub overlap_num: Option<u32>,
    pub is_permissive: bool,
    pub is_prohibited: bool,
    /// Keys outside the attribute vocabulary.
    pub extra: Map<String, Value>,
}

impl AttributeRecord {
    pub fn new(phase: &str, phase_order: u32) -> Self {
        AttributeRecord {
            phase: phase.to_owned(),
            phase_order,
            ..Default::default()
        }
    }

    /// True when the record carries enough to place the phase without the
    /// phase sequence.
    pub fn has_standalone_timing(&self) -> bool {
        self.start_time.is_some()
            || self.end_time.is_some()
            || self.green_start.is_some()
            || self.green_end.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanIR {
    pub sequence: Vec<StructureNode>,
    pub attributes: Vec<AttributeRecord>,
    pub cycle_length: Option<u32>,
}

impl PlanIR {
    pub fn record(&self, phase: &str, order: u32) -> Option<&AttributeRecord> {
        self.attributes
            .iter()
            .find(|r| r.phase == phase && r.phase_order == order)
    }

    /// Visits every phase entry of the sequence in traversal order: nodes in
    /// order, stages before later stages, ring 1 before ring 2.
    pub fn visit_entries(&self, mut f: impl FnMut(&PhaseEntry)) {
        for node in &self.sequence {
            visit_node(node, &mut f);
        }
    }

    pub fn visit_entries_mut(&mut self, mut f: impl FnMut(&mut PhaseEntry)) {
        for node in &mut self.sequence {
            visit_node_mut(node, &mut f);
        }
    }

    /// Phase names of the sequence in traversal order.
    pub fn sequence_phases(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_entries(|e| out.push(e.phase.clone()));
        out
    }
}

fn visit_node(node: &StructureNode, f: &mut impl FnMut(&PhaseEntry)) {
    match node {
        StructureNode::Stages(items) => {
            for item in items {
                match item {
                    StageItem::Stage(stage) => stage.iter().for_each(&mut *f),
                    StageItem::Rings(rings) => rings.iter().flatten().for_each(&mut *f),
                }
            }
        }
        StructureNode::Rings(rings) => {
            for ring in rings {
                visit_ring(ring, f);
            }
        }
        StructureNode::FlatRing(ring) => visit_ring(ring, f),
        StructureNode::Unlabeled(items) => {
            for item in items {
                match item {
                    UnlabeledItem::Phase(p) => f(p),
                    UnlabeledItem::Stage(stage) => stage.iter().for_each(&mut *f),
                }
            }
        }
        StructureNode::Unrecognized(_) => {}
    }
}

fn visit_ring(ring: &Ring, f: &mut impl FnMut(&PhaseEntry)) {
    for el in ring {
        match el {
            RingElement::Phase(p) => f(p),
            RingElement::Stages(stages) => stages.iter().flatten().for_each(&mut *f),
        }
    }
}

fn visit_node_mut(node: &mut StructureNode, f: &mut impl FnMut(&mut PhaseEntry)) {
    match node {
        StructureNode::Stages(items) => {
            for item in items {
                match item {
                    StageItem::Stage(stage) => stage.iter_mut().for_each(&mut *f),
                    StageItem::Rings(rings) => rings.iter_mut().flatten().for_each(&mut *f),
                }
            }
        }
        StructureNode::Rings(rings) => {
            for ring in rings {
                visit_ring_mut(ring, f);
            }
        }
        StructureNode::FlatRing(ring) => visit_ring_mut(ring, f),
        StructureNode::Unlabeled(items) => {
            for item in items {
                match item {
                    UnlabeledItem::Phase(p) => f(p),
                    UnlabeledItem::Stage(stage) => stage.iter_mut().for_each(&mut *f),
                }
            }
        }
        StructureNode::Unrecognized(_) => {}
    }
}

fn visit_ring_mut(ring: &mut Ring, f: &mut impl FnMut(&mut PhaseEntry)) {
    for el in ring {
        match el {
            RingElement::Phase(p) => f(p),
            RingElement::Stages(stages) => stages.iter_mut().flatten().for_each(&mut *f),
        }
    }
}
