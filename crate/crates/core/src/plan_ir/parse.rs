use serde_json::{Map, Value};

use super::*;
use crate::diagnostic::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("no decodable JSON object found in the response")]
    NoJsonFound,
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("invalid value at {location}: {message}")]
    Value { location: String, message: String },
}

impl IrError {
    fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        IrError::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    fn value(location: impl Into<String>, message: impl Into<String>) -> Self {
        IrError::Value {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            IrError::NoJsonFound => "no-json-found",
            IrError::Schema { .. } => "schema-error",
            IrError::Value { .. } => "value-error",
        }
    }
}

/// A decoded plan plus the non-fatal notes collected while decoding it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutput {
    pub ir: PlanIR,
    pub warnings: Vec<Diagnostic>,
}

/// Decodes the plan from a chat response.
///
/// The response may wrap the JSON in code fences or prose. The first
/// well-formed object carrying `result1` or `result2` wins; later ones are
/// reported and ignored. A fenced block that lists the three results without
/// the enclosing braces is also accepted.
pub fn parse_llm_output(text: &str) -> Result<ParseOutput, IrError> {
    let mut warnings = Vec::new();
    let value = extract_result_object(text, &mut warnings)?;
    let ir = decode_plan(&value, &mut warnings)?;
    Ok(ParseOutput { ir, warnings })
}

fn has_result_key(v: &Value) -> bool {
    v.as_object()
        .is_some_and(|o| o.contains_key("result1") || o.contains_key("result2"))
}

/// Scans `text` for JSON objects; returns (start, end, value) of each object
/// that decodes, in order of start offset.
fn first_object_from(text: &str, from: usize, want_result: bool) -> Option<(usize, usize, Value)> {
    let bytes = text.as_bytes();
    let mut i = from;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
            if let Some(Ok(v)) = stream.next() {
                if v.is_object() && (!want_result || has_result_key(&v)) {
                    return Some((i, i + stream.byte_offset(), v));
                }
            }
        }
        i += 1;
    }
    None
}

fn extract_result_object(text: &str, warnings: &mut Vec<Diagnostic>) -> Result<Value, IrError> {
    if let Some((_, end, v)) = first_object_from(text, 0, true) {
        if first_object_from(text, end, true).is_some() {
            warnings.push(Diagnostic::warning(
                "extra-result-object",
                "response",
                "more than one result object in the response; only the first is used",
            ));
        }
        return Ok(v);
    }

    // Bare `"result1": ..., "result2": ...` listings without enclosing braces.
    for block in fenced_blocks(text).into_iter().chain(std::iter::once(text)) {
        if let Some(v) = wrap_bare_results(block) {
            warnings.push(Diagnostic::info(
                "wrapped-bare-results",
                "response",
                "result keys were listed without enclosing braces",
            ));
            return Ok(v);
        }
    }

    if let Some((_, _, _)) = first_object_from(text, 0, false) {
        return Err(IrError::schema(
            "response",
            "JSON object lacks both `result1` and `result2`",
        ));
    }
    Err(IrError::NoJsonFound)
}

/// Wraps the listing starting at the first result key in braces. Prose after
/// the listing is dropped by trying each line end from the last one back.
fn wrap_bare_results(block: &str) -> Option<Value> {
    let start = ["\"result1\"", "\"result2\""]
        .iter()
        .filter_map(|k| block.find(k))
        .min()?;
    let body = &block[start..];
    let ends = std::iter::once(body.len()).chain(body.match_indices('\n').map(|(i, _)| i).rev());
    for end in ends {
        let cand = body[..end].trim().trim_end_matches(',');
        if let Ok(v) = serde_json::from_str::<Value>(&format!("{{{cand}}}")) {
            if has_result_key(&v) {
                return Some(v);
            }
        }
    }
    None
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // skip the info string (`json`) up to the end of the line
        let body_start = after.find('\n').map_or(after.len(), |n| n + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                out.push(&body[..close]);
                rest = &body[close + 3..];
            }
            None => break,
        }
    }
    out
}

/// Decodes a plan from an already-extracted JSON value.
pub(crate) fn decode_plan(
    value: &Value,
    warnings: &mut Vec<Diagnostic>,
) -> Result<PlanIR, IrError> {
    let obj = value
        .as_object()
        .filter(|o| o.contains_key("result1") || o.contains_key("result2"))
        .ok_or_else(|| IrError::schema("$", "expected an object with `result1` or `result2`"))?;

    for key in obj.keys() {
        if !matches!(key.as_str(), "result1" | "result2" | "result3") {
            warnings.push(Diagnostic::warning(
                "unknown-key",
                format!("$.{key}"),
                format!("unknown top-level key `{key}` ignored"),
            ));
        }
    }

    let sequence = match obj.get("result1") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => decode_sequence(items, warnings)?,
        Some(_) => return Err(IrError::schema("result1", "expected an array")),
    };

    let mut attributes = Vec::new();
    match obj.get("result2") {
        None | Some(Value::Null) => {}
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let loc = format!("result2[{i}]");
                let rec = item
                    .as_object()
                    .ok_or_else(|| IrError::schema(&loc, "expected a phase object"))?;
                if rec.is_empty() {
                    return Err(IrError::schema(&loc, "empty phase object"));
                }
                if rec.len() > 1 {
                    warnings.push(Diagnostic::warning(
                        "multi-phase-object",
                        &loc,
                        "phase object holds several phases; split into one record each",
                    ));
                }
                for (name, attrs) in rec {
                    attributes.push(decode_record(
                        name,
                        attrs,
                        &format!("{loc}.{name}"),
                        warnings,
                    )?);
                }
            }
        }
        Some(_) => return Err(IrError::schema("result2", "expected an array")),
    }

    let cycle_length = match obj.get("result3") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let c = seconds(v, "result3")?;
            if c == 0 {
                return Err(IrError::value("result3", "cycle length must be positive"));
            }
            Some(c)
        }
    };

    Ok(PlanIR {
        sequence,
        attributes,
        cycle_length,
    })
}

fn structure_label(v: &Value) -> Option<(&str, &Value)> {
    let obj = v.as_object()?;
    if obj.len() != 1 {
        return None;
    }
    let (k, body) = obj.iter().next()?;
    matches!(k.as_str(), "stageStyle" | "ringStyle").then_some((k.as_str(), body))
}

fn is_phase_object(v: &Value) -> bool {
    v.as_object().is_some_and(|o| {
        !o.is_empty() && !o.contains_key("stageStyle") && !o.contains_key("ringStyle")
    })
}

fn decode_sequence(
    items: &[Value],
    warnings: &mut Vec<Diagnostic>,
) -> Result<Vec<StructureNode>, IrError> {
    let mut nodes = Vec::new();
    let mut loose: Vec<UnlabeledItem> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let loc = format!("result1[{i}]");
        if is_phase_object(item) {
            // phase objects directly in result1: gather consecutive ones
            for e in decode_phase_object(item, &loc, warnings)? {
                loose.push(UnlabeledItem::Phase(e));
            }
            continue;
        }
        if !loose.is_empty() {
            nodes.push(StructureNode::Unlabeled(std::mem::take(&mut loose)));
        }
        nodes.push(decode_node(item, &loc, warnings)?);
    }
    if !loose.is_empty() {
        nodes.push(StructureNode::Unlabeled(loose));
    }
    Ok(nodes)
}

fn decode_node(
    v: &Value,
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<StructureNode, IrError> {
    match structure_label(v) {
        Some(("stageStyle", Value::Array(body))) => {
            let loc = format!("{loc}.stageStyle");
            decode_stage_items(body, &loc, warnings).map(|opt| {
                opt.map_or_else(
                    || StructureNode::Unrecognized(v.clone()),
                    StructureNode::Stages,
                )
            })
        }
        Some(("ringStyle", Value::Array(body))) => {
            let loc = format!("{loc}.ringStyle");
            decode_ring_body(v, body, &loc, warnings)
        }
        Some(_) => Ok(StructureNode::Unrecognized(v.clone())),
        None => match v {
            Value::Array(items) => {
                let mut out = Vec::new();
                for (j, it) in items.iter().enumerate() {
                    let iloc = format!("{loc}[{j}]");
                    match it {
                        Value::Array(stage) => match decode_stage(stage, &iloc, warnings)? {
                            Some(s) => out.push(UnlabeledItem::Stage(s)),
                            None => return Ok(StructureNode::Unrecognized(v.clone())),
                        },
                        _ if is_phase_object(it) => {
                            for e in decode_phase_object(it, &iloc, warnings)? {
                                out.push(UnlabeledItem::Phase(e));
                            }
                        }
                        _ => return Ok(StructureNode::Unrecognized(v.clone())),
                    }
                }
                Ok(StructureNode::Unlabeled(out))
            }
            _ => Ok(StructureNode::Unrecognized(v.clone())),
        },
    }
}

/// Stage-style body. `None` when the shape is not understood.
fn decode_stage_items(
    body: &[Value],
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<Option<Vec<StageItem>>, IrError> {
    let mut items = Vec::new();
    for (i, item) in body.iter().enumerate() {
        let iloc = format!("{loc}[{i}]");
        match (item, structure_label(item)) {
            (Value::Array(stage), _) => match decode_stage(stage, &iloc, warnings)? {
                Some(s) => items.push(StageItem::Stage(s)),
                None => return Ok(None),
            },
            (_, Some(("ringStyle", Value::Array(rings)))) => {
                let mut block = Vec::new();
                for (j, ring) in rings.iter().enumerate() {
                    let Value::Array(ring) = ring else {
                        return Ok(None);
                    };
                    match decode_stage(ring, &format!("{iloc}.ringStyle[{j}]"), warnings)? {
                        Some(r) => block.push(r),
                        None => return Ok(None),
                    }
                }
                items.push(StageItem::Rings(block));
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(items))
}

/// A flat list of phase objects. `None` when an element is not a phase object.
fn decode_stage(
    items: &[Value],
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<Option<Stage>, IrError> {
    let mut out = Vec::new();
    for (i, it) in items.iter().enumerate() {
        if !is_phase_object(it) {
            return Ok(None);
        }
        out.extend(decode_phase_object(it, &format!("{loc}[{i}]"), warnings)?);
    }
    Ok(Some(out))
}

fn decode_ring_body(
    whole: &Value,
    body: &[Value],
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<StructureNode, IrError> {
    let arrays = body.iter().filter(|v| v.is_array()).count();
    if arrays == body.len() {
        let mut rings = Vec::new();
        for (i, ring) in body.iter().enumerate() {
            let Value::Array(elements) = ring else {
                unreachable!()
            };
            match decode_ring(elements, &format!("{loc}[{i}]"), warnings)? {
                Some(r) => rings.push(r),
                None => return Ok(StructureNode::Unrecognized(whole.clone())),
            }
        }
        return Ok(StructureNode::Rings(rings));
    }
    if arrays == 0 {
        return Ok(match decode_ring(body, loc, warnings)? {
            Some(r) => StructureNode::FlatRing(r),
            None => StructureNode::Unrecognized(whole.clone()),
        });
    }
    Ok(StructureNode::Unrecognized(whole.clone()))
}

fn decode_ring(
    elements: &[Value],
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<Option<Ring>, IrError> {
    let mut ring = Vec::new();
    for (i, el) in elements.iter().enumerate() {
        let eloc = format!("{loc}[{i}]");
        match structure_label(el) {
            Some(("stageStyle", Value::Array(stages))) => {
                let mut block = Vec::new();
                for (j, stage) in stages.iter().enumerate() {
                    let Value::Array(stage) = stage else {
                        return Ok(None);
                    };
                    match decode_stage(stage, &format!("{eloc}.stageStyle[{j}]"), warnings)? {
                        Some(s) => block.push(s),
                        None => return Ok(None),
                    }
                }
                ring.push(RingElement::Stages(block));
            }
            Some(_) => return Ok(None),
            None if is_phase_object(el) => {
                for e in decode_phase_object(el, &eloc, warnings)? {
                    ring.push(RingElement::Phase(e));
                }
            }
            None => return Ok(None),
        }
    }
    Ok(Some(ring))
}

fn decode_phase_object(
    v: &Value,
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<Vec<PhaseEntry>, IrError> {
    let obj = v.as_object().expect("checked by is_phase_object");
    if obj.len() > 1 {
        warnings.push(Diagnostic::warning(
            "multi-phase-object",
            loc,
            "phase object holds several phases; split into one entry each",
        ));
    }
    let mut out = Vec::new();
    for (name, body) in obj {
        let eloc = format!("{loc}.{name}");
        let attrs = body
            .as_object()
            .ok_or_else(|| IrError::schema(&eloc, "expected an attribute object"))?;
        let split = attrs
            .get("split")
            .map(|v| seconds(v, &format!("{eloc}.split")))
            .transpose()?;
        let green = attrs
            .get("greenTime")
            .map(|v| seconds(v, &format!("{eloc}.greenTime")))
            .transpose()?;
        let duration = match (split, green) {
            (Some(s), None) => Duration::Split(s),
            (None, Some(g)) => Duration::GreenTime(g),
            (Some(_), Some(_)) => {
                return Err(IrError::schema(&eloc, "both `split` and `greenTime` given"));
            }
            (None, None) => {
                return Err(IrError::schema(&eloc, "phase needs `split` or `greenTime`"));
            }
        };
        if duration.seconds() == 0 {
            return Err(IrError::value(&eloc, "duration must be positive"));
        }
        let mut extra = Map::new();
        for (k, val) in attrs {
            if k != "split" && k != "greenTime" {
                warnings.push(Diagnostic::warning(
                    "unknown-key",
                    format!("{eloc}.{k}"),
                    format!("key `{k}` is not used on a sequence entry"),
                ));
                extra.insert(k.clone(), val.clone());
            }
        }
        out.push(PhaseEntry {
            phase: name.clone(),
            duration,
            extra,
        });
    }
    Ok(out)
}

fn decode_record(
    name: &str,
    attrs: &Value,
    loc: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<AttributeRecord, IrError> {
    let attrs = attrs
        .as_object()
        .ok_or_else(|| IrError::schema(loc, "expected an attribute object"))?;
    let mut rec = AttributeRecord {
        phase: name.to_owned(),
        phase_order: 1,
        ..Default::default()
    };
    if !attrs.contains_key("phaseOrder") {
        warnings.push(Diagnostic::warning(
            "missing-phase-order",
            loc,
            "record has no `phaseOrder`; assuming 1",
        ));
    }
    for (key, v) in attrs {
        let kloc = format!("{loc}.{key}");
        let sec = || seconds(v, &kloc);
        match key.as_str() {
            "phaseOrder" => {
                rec.phase_order = sec()?;
                if rec.phase_order == 0 {
                    return Err(IrError::value(&kloc, "phaseOrder is 1-based"));
                }
            }
            "split" => rec.split = Some(sec()?),
            "greenTime" => rec.green_time = Some(sec()?),
            "startTime" => rec.start_time = Some(sec()?),
            "endTime" => {
                rec.end_time = Some(match v {
                    Value::String(s) if is_cycle_token(s) => EndTime::CycleLength,
                    _ => EndTime::At(sec()?),
                })
            }
            "greenStart" => rec.green_start = Some(sec()?),
            "greenEnd" => rec.green_end = Some(sec()?),
            "lateStart" => rec.late_start = Some(sec()?),
            "earlyCutOff" => rec.early_cut_off = Some(sec()?),
            "yellow" => rec.yellow = Some(sec()?),
            "redAmber" => rec.red_amber = Some(sec()?),
            "allRed" => rec.all_red = Some(sec()?),
            "greenFlash" => rec.green_flash = Some(sec()?),
            "pedClear" => rec.ped_clear = Some(sec()?),
            "overlapNum" => rec.overlap_num = Some(sec()?),
            "parentPhase" => {
                rec.parent_phase = match v {
                    Value::Null => None,
                    Value::String(s) if s.trim().eq_ignore_ascii_case(DEFAULT_PARENT_TOKEN) => {
                        Some(ParentRef::Default)
                    }
                    Value::String(s) => Some(ParentRef::Phase(s.clone())),
                    _ => return Err(IrError::value(&kloc, "expected a phase name")),
                }
            }
            "isPermissive" => rec.is_permissive = flag(v, &kloc)?,
            "isProhibited" => rec.is_prohibited = flag(v, &kloc)?,
            _ => {
                warnings.push(Diagnostic::warning(
                    "unknown-key",
                    &kloc,
                    format!("unknown attribute `{key}` kept but not used"),
                ));
                rec.extra.insert(key.clone(), v.clone());
            }
        }
    }
    Ok(rec)
}

fn is_cycle_token(s: &str) -> bool {
    let folded: String = s.chars().filter(|c| c.is_alphanumeric()).collect();
    folded.eq_ignore_ascii_case(CYCLE_LENGTH_TOKEN)
}

fn seconds(v: &Value, loc: &str) -> Result<u32, IrError> {
    let Value::Number(n) = v else {
        return Err(IrError::value(
            loc,
            format!("expected whole seconds, got {v}"),
        ));
    };
    if let Some(u) = n.as_u64() {
        return u32::try_from(u).map_err(|_| IrError::value(loc, "value too large"));
    }
    if n.as_i64().is_some() {
        return Err(IrError::value(loc, format!("negative seconds {n}")));
    }
    let f = n.as_f64().unwrap_or(f64::NAN);
    if f < 0.0 {
        return Err(IrError::value(loc, format!("negative seconds {n}")));
    }
    if f.fract() != 0.0 || !f.is_finite() || f > u32::MAX as f64 {
        return Err(IrError::value(
            loc,
            format!("seconds must be whole, got {n}"),
        ));
    }
    Ok(f as u32)
}

fn flag(v: &Value, loc: &str) -> Result<bool, IrError> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        Value::Null => Ok(false),
        _ => Err(IrError::value(
            loc,
            format!("expected a boolean flag, got {v}"),
        )),
    }
}
