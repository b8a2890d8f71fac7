use serde_json::{json, Map, Value};

use super::*;

/// Canonical compact JSON text for `ir`.
pub fn serialize(ir: &PlanIR) -> String {
    to_value(ir).to_string()
}

pub fn serialize_pretty(ir: &PlanIR) -> String {
    serde_json::to_string_pretty(&to_value(ir)).expect("plan values always serialize")
}

pub(crate) fn to_value(ir: &PlanIR) -> Value {
    let mut top = Map::new();
    top.insert(
        "result1".into(),
        Value::Array(ir.sequence.iter().map(node_value).collect()),
    );
    top.insert(
        "result2".into(),
        Value::Array(ir.attributes.iter().map(record_value).collect()),
    );
    top.insert(
        "result3".into(),
        ir.cycle_length.map_or(Value::Null, Value::from),
    );
    Value::Object(top)
}

fn single(key: &str, v: Value) -> Value {
    let mut m = Map::new();
    m.insert(key.to_owned(), v);
    Value::Object(m)
}

fn entry_value(e: &PhaseEntry) -> Value {
    let mut attrs = Map::new();
    match e.duration {
        Duration::Split(s) => attrs.insert("split".into(), s.into()),
        Duration::GreenTime(g) => attrs.insert("greenTime".into(), g.into()),
    };
    for (k, v) in &e.extra {
        attrs.insert(k.clone(), v.clone());
    }
    single(&e.phase, Value::Object(attrs))
}

fn stage_value(stage: &Stage) -> Value {
    Value::Array(stage.iter().map(entry_value).collect())
}

fn ring_value(ring: &Ring) -> Value {
    Value::Array(
        ring.iter()
            .map(|el| match el {
                RingElement::Phase(p) => entry_value(p),
                RingElement::Stages(stages) => single(
                    "stageStyle",
                    Value::Array(stages.iter().map(stage_value).collect()),
                ),
            })
            .collect(),
    )
}

fn node_value(node: &StructureNode) -> Value {
    match node {
        StructureNode::Stages(items) => single(
            "stageStyle",
            Value::Array(
                items
                    .iter()
                    .map(|item| match item {
                        StageItem::Stage(s) => stage_value(s),
                        StageItem::Rings(rings) => single(
                            "ringStyle",
                            Value::Array(rings.iter().map(stage_value).collect()),
                        ),
                    })
                    .collect(),
            ),
        ),
        StructureNode::Rings(rings) => single(
            "ringStyle",
            Value::Array(rings.iter().map(ring_value).collect()),
        ),
        StructureNode::FlatRing(ring) => single("ringStyle", ring_value(ring)),
        StructureNode::Unlabeled(items) => Value::Array(
            items
                .iter()
                .map(|item| match item {
                    UnlabeledItem::Phase(p) => entry_value(p),
                    UnlabeledItem::Stage(s) => stage_value(s),
                })
                .collect(),
        ),
        StructureNode::Unrecognized(v) => v.clone(),
    }
}

fn record_value(r: &AttributeRecord) -> Value {
    let mut m = Map::new();
    m.insert("phaseOrder".into(), r.phase_order.into());
    let secs = [
        ("split", r.split),
        ("greenTime", r.green_time),
        ("startTime", r.start_time),
    ];
    for (k, v) in secs {
        if let Some(v) = v {
            m.insert(k.into(), v.into());
        }
    }
    match r.end_time {
        Some(EndTime::At(t)) => {
            m.insert("endTime".into(), t.into());
        }
        Some(EndTime::CycleLength) => {
            m.insert("endTime".into(), json!(CYCLE_LENGTH_TOKEN));
        }
        None => {}
    }
    let secs = [
        ("greenStart", r.green_start),
        ("greenEnd", r.green_end),
        ("lateStart", r.late_start),
        ("earlyCutOff", r.early_cut_off),
        ("yellow", r.yellow),
        ("redAmber", r.red_amber),
        ("allRed", r.all_red),
        ("greenFlash", r.green_flash),
        ("pedClear", r.ped_clear),
    ];
    for (k, v) in secs {
        if let Some(v) = v {
            m.insert(k.into(), v.into());
        }
    }
    match &r.parent_phase {
        Some(ParentRef::Phase(p)) => {
            m.insert("parentPhase".into(), json!(p));
        }
        Some(ParentRef::Default) => {
            m.insert("parentPhase".into(), json!(DEFAULT_PARENT_TOKEN));
        }
        None => {}
    }
    if let Some(n) = r.overlap_num {
        m.insert("overlapNum".into(), n.into());
    }
    if r.is_permissive {
        m.insert("isPermissive".into(), true.into());
    }
    if r.is_prohibited {
        m.insert("isProhibited".into(), true.into());
    }
    for (k, v) in &r.extra {
        m.insert(k.clone(), v.clone());
    }
    single(&r.phase, Value::Object(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan() {
        assert_eq!(
            serialize(&PlanIR::default()),
            r#"{"result1":[],"result2":[],"result3":null}"#
        );
    }

    #[test]
    fn cycle_length_token_is_literal() {
        let mut rec = AttributeRecord::new("EBR", 1);
        rec.start_time = Some(60);
        rec.end_time = Some(EndTime::CycleLength);
        rec.is_permissive = true;
        let ir = PlanIR {
            attributes: vec![rec],
            ..Default::default()
        };
        let text = serialize(&ir);
        assert!(text.contains(r#""endTime":"cycleLength""#), "{text}");
        assert_eq!(parse_llm_output(&text).unwrap().ir, ir);
    }

    #[test]
    fn nested_shapes_round_trip() {
        let ir = PlanIR {
            sequence: vec![
                StructureNode::Stages(vec![
                    StageItem::Rings(vec![
                        vec![PhaseEntry::split("WBL", 33), PhaseEntry::split("EBT", 24)],
                        vec![PhaseEntry::split("EBL", 18), PhaseEntry::split("WBT", 39)],
                    ]),
                    StageItem::Stage(vec![
                        PhaseEntry::split("NBL", 26),
                        PhaseEntry::split("SBL", 26),
                    ]),
                ]),
                StructureNode::Rings(vec![
                    vec![
                        RingElement::Phase(PhaseEntry::split("WBL", 49)),
                        RingElement::Stages(vec![vec![PhaseEntry::green("EBT", 50)]]),
                    ],
                    vec![RingElement::Phase(PhaseEntry::split("WBT", 74))],
                ]),
            ],
            attributes: vec![AttributeRecord::new("WBL", 1)],
            cycle_length: Some(138),
        };
        let text = serialize_pretty(&ir);
        assert_eq!(parse_llm_output(&text).unwrap().ir, ir);
    }
}
