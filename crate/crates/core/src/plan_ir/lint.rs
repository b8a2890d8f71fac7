use std::collections::HashSet;

use super::*;
use crate::diagnostic::Diagnostic;

/// Structural checks on a decoded plan. Never fails; findings come back as
/// diagnostics in a deterministic order.
pub fn lint_ir(ir: &PlanIR) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for (i, node) in ir.sequence.iter().enumerate() {
        lint_node(node, &format!("result1[{i}]"), &mut out);
    }

    let mut seen = HashSet::new();
    for (i, rec) in ir.attributes.iter().enumerate() {
        let loc = format!("result2[{i}].{}", rec.phase);
        if !seen.insert((rec.phase.as_str(), rec.phase_order)) {
            out.push(Diagnostic::error(
                "duplicate-record",
                &loc,
                format!(
                    "duplicate record for {} phaseOrder {}",
                    rec.phase, rec.phase_order
                ),
            ));
        }
        if rec.is_permissive && rec.is_prohibited {
            out.push(Diagnostic::error(
                "exclusive-flags",
                &loc,
                "isPermissive and isProhibited are both set",
            ));
        }
        for key in rec.extra.keys() {
            out.push(Diagnostic::warning(
                "unknown-key",
                format!("{loc}.{key}"),
                format!("unknown attribute `{key}`"),
            ));
        }
    }
    out
}

fn lint_entries(stage: &Stage, loc: &str, out: &mut Vec<Diagnostic>) {
    if stage.is_empty() {
        out.push(Diagnostic::error("empty-stage", loc, "stage has no phases"));
    }
    for (i, e) in stage.iter().enumerate() {
        lint_entry(e, &format!("{loc}[{i}]"), out);
    }
}

fn lint_entry(e: &PhaseEntry, loc: &str, out: &mut Vec<Diagnostic>) {
    for key in e.extra.keys() {
        out.push(Diagnostic::warning(
            "unknown-key",
            format!("{loc}.{}.{key}", e.phase),
            format!("unknown key `{key}` on a sequence entry"),
        ));
    }
}

fn lint_ring(ring: &Ring, loc: &str, out: &mut Vec<Diagnostic>) {
    if ring.is_empty() {
        out.push(Diagnostic::error("empty-ring", loc, "ring has no phases"));
    }
    for (i, el) in ring.iter().enumerate() {
        let eloc = format!("{loc}[{i}]");
        match el {
            RingElement::Phase(p) => lint_entry(p, &eloc, out),
            RingElement::Stages(stages) => {
                if stages.is_empty() {
                    out.push(Diagnostic::error(
                        "empty-stage",
                        &eloc,
                        "stage block is empty",
                    ));
                }
                for (j, s) in stages.iter().enumerate() {
                    lint_entries(s, &format!("{eloc}.stageStyle[{j}]"), out);
                }
            }
        }
    }
}

fn lint_node(node: &StructureNode, loc: &str, out: &mut Vec<Diagnostic>) {
    match node {
        StructureNode::Stages(items) => {
            if items.is_empty() {
                out.push(Diagnostic::error(
                    "empty-stage",
                    loc,
                    "stageStyle has no stages",
                ));
            }
            for (i, item) in items.iter().enumerate() {
                let iloc = format!("{loc}.stageStyle[{i}]");
                match item {
                    StageItem::Stage(s) => lint_entries(s, &iloc, out),
                    StageItem::Rings(rings) => {
                        if rings.is_empty() {
                            out.push(Diagnostic::error(
                                "empty-ring",
                                &iloc,
                                "ring block is empty",
                            ));
                        }
                        for (j, r) in rings.iter().enumerate() {
                            let rloc = format!("{iloc}.ringStyle[{j}]");
                            if r.is_empty() {
                                out.push(Diagnostic::error(
                                    "empty-ring",
                                    &rloc,
                                    "ring has no phases",
                                ));
                            }
                            for (k, e) in r.iter().enumerate() {
                                lint_entry(e, &format!("{rloc}[{k}]"), out);
                            }
                        }
                    }
                }
            }
        }
        StructureNode::Rings(rings) => {
            if rings.is_empty() {
                out.push(Diagnostic::error(
                    "empty-ring",
                    loc,
                    "ringStyle has no rings",
                ));
            }
            for (i, r) in rings.iter().enumerate() {
                lint_ring(r, &format!("{loc}.ringStyle[{i}]"), out);
            }
        }
        StructureNode::FlatRing(r) => lint_ring(r, &format!("{loc}.ringStyle"), out),
        StructureNode::Unlabeled(items) => {
            if items.is_empty() {
                out.push(Diagnostic::error("empty-stage", loc, "empty phase list"));
            }
            for (i, item) in items.iter().enumerate() {
                let iloc = format!("{loc}[{i}]");
                match item {
                    UnlabeledItem::Phase(p) => lint_entry(p, &iloc, out),
                    UnlabeledItem::Stage(s) => lint_entries(s, &iloc, out),
                }
            }
        }
        StructureNode::Unrecognized(_) => {}
    }
}
