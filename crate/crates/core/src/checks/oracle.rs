//! Exhaustive re-derivation of every mapping property.
//!
//! Nothing here touches the checkers' lookup tables or the set helpers on
//! [`Trace`]: every fact is recomputed by scanning the raw declaration and
//! event vectors, pair by pair. Quadratic, and meant for small traces.

use std::collections::BTreeMap;

use super::{Code, Mapping, ValidationReport, Violation};
use crate::model::{
    Declaration, EntityId, EntityKind, MappingEvent, QualityResult, SetName, Trace, UNRECOGNIZED,
};

fn decl_name(decl: &Declaration) -> (EntityKind, &str) {
    match decl {
        Declaration::Structure(s) => (EntityKind::Structure, s.name.as_str()),
        Declaration::Phenomenon(p) => (EntityKind::Phenomenon, p.name.as_str()),
        Declaration::Class(c) => (EntityKind::Class, c.name.as_str()),
    }
}

/// Is the declaration at `pos` the first one with its kind and name?
fn is_first(trace: &Trace, pos: usize) -> bool {
    let me = decl_name(&trace.declarations[pos]);
    (0..pos).all(|j| decl_name(&trace.declarations[j]) != me)
}

fn declared_before(trace: &Trace, kind: EntityKind, name: &str, pos: usize) -> bool {
    (0..pos).any(|j| decl_name(&trace.declarations[j]) == (kind, name))
}

fn declared(trace: &Trace, kind: EntityKind, name: &str) -> bool {
    declared_before(trace, kind, name, trace.declarations.len())
}

/// Does some first-declared phenomenon list `structure`?
fn owned(trace: &Trace, structure: &str) -> bool {
    (0..trace.declarations.len()).any(|j| match &trace.declarations[j] {
        Declaration::Phenomenon(p) => is_first(trace, j) && p.structures.iter().any(|s| s == structure),
        _ => false,
    })
}

fn produces(event: &MappingEvent, kind: EntityKind, name: &str) -> bool {
    match (event, kind) {
        (MappingEvent::Sample { sample, .. }, EntityKind::Sample) => sample == name,
        (MappingEvent::Preprocess { output, .. }, EntityKind::Preprocessed) => output == name,
        (MappingEvent::Extract { template, .. }, EntityKind::Template) => template == name,
        _ => false,
    }
}

fn produced_before(trace: &Trace, kind: EntityKind, name: &str, idx: usize) -> bool {
    trace.events[..idx].iter().any(|e| produces(e, kind, name))
}

fn produced(trace: &Trace, kind: EntityKind, name: &str) -> bool {
    produced_before(trace, kind, name, trace.events.len())
}

fn qualified(trace: &Trace, template: &str) -> bool {
    if !produced(trace, EntityKind::Template, template) {
        return false;
    }
    for event in &trace.events {
        if let MappingEvent::Quality { template: t, result } = event {
            if t == template {
                return *result == QualityResult::Passed;
            }
        }
    }
    false
}

/// Classes (first declarations) bound to `phenomenon`.
fn bound_classes<'a>(trace: &'a Trace, phenomenon: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    for (j, decl) in trace.declarations.iter().enumerate() {
        if let Declaration::Class(c) = decl {
            if is_first(trace, j) && c.bound.as_deref() == Some(phenomenon) {
                out.push(c.name.as_str());
            }
        }
    }
    out
}

fn push(out: &mut Vec<Violation>, code: Code, mapping: Mapping, kind: EntityKind, name: &str) {
    out.push(Violation::new(
        code,
        mapping,
        EntityId::new(kind, name),
        "found by exhaustive oracle",
    ));
}

fn structural(trace: &Trace, out: &mut Vec<Violation>) {
    for (pos, decl) in trace.declarations.iter().enumerate() {
        let (kind, name) = decl_name(decl);
        if !is_first(trace, pos) {
            push(out, Code::StructDuplicateId, Mapping::Structural, kind, name);
        }
        match decl {
            Declaration::Structure(_) => {
                if is_first(trace, pos) && !owned(trace, name) {
                    push(out, Code::OrphanEntity, Mapping::Structural, kind, name);
                }
            }
            Declaration::Phenomenon(p) => {
                for st in &p.structures {
                    if !declared_before(trace, EntityKind::Structure, st, pos) {
                        push(out, Code::StructDanglingRef, Mapping::Structural, kind, name);
                    }
                }
            }
            Declaration::Class(c) => {
                if c.name == UNRECOGNIZED {
                    push(out, Code::StructDuplicateId, Mapping::Structural, kind, name);
                }
                if let Some(bound) = &c.bound {
                    if !declared_before(trace, EntityKind::Phenomenon, bound, pos) {
                        push(out, Code::StructDanglingRef, Mapping::Structural, kind, name);
                    }
                    if is_first(trace, pos) {
                        let earlier_binding = (0..pos).any(|j| match &trace.declarations[j] {
                            Declaration::Class(other) => {
                                is_first(trace, j) && other.bound.as_ref() == Some(bound)
                            }
                            _ => false,
                        });
                        if earlier_binding {
                            push(out, Code::StructDuplicateId, Mapping::Structural, kind, name);
                        }
                    }
                }
            }
        }
    }
}

fn events(trace: &Trace, out: &mut Vec<Violation>) {
    let sample_arity = trace.arity.sample_sources();
    let extract_arity = trace.arity.extract_inputs();

    for (idx, event) in trace.events.iter().enumerate() {
        match event {
            MappingEvent::Sample { sample, sources } => {
                if sources.len() != sample_arity {
                    push(out, Code::SBadArity, Mapping::S, EntityKind::Sample, sample);
                }
                for st in sources {
                    if !declared(trace, EntityKind::Structure, st) || !owned(trace, st) {
                        push(out, Code::StructDanglingRef, Mapping::S, EntityKind::Sample, sample);
                    }
                }
            }
            MappingEvent::Preprocess { output, input } => {
                if !produced_before(trace, EntityKind::Sample, input, idx) {
                    push(out, Code::StructDanglingRef, Mapping::P, EntityKind::Preprocessed, output);
                }
            }
            MappingEvent::Extract { template, inputs } => {
                if inputs.len() != extract_arity {
                    push(out, Code::FBadArity, Mapping::F, EntityKind::Template, template);
                }
                for sp in inputs {
                    if !produced_before(trace, EntityKind::Preprocessed, sp, idx) {
                        push(out, Code::StructDanglingRef, Mapping::F, EntityKind::Template, template);
                    }
                }
            }
            MappingEvent::Quality { template, .. } => {
                if !produced_before(trace, EntityKind::Template, template, idx) {
                    push(out, Code::StructDanglingRef, Mapping::Q, EntityKind::Template, template);
                }
                let earlier = trace.events[..idx]
                    .iter()
                    .any(|e| matches!(e, MappingEvent::Quality { template: t, .. } if t == template));
                if earlier {
                    push(out, Code::QNotPartialFunction, Mapping::Q, EntityKind::Template, template);
                }
            }
            MappingEvent::Recognize {
                batch,
                template,
                claimed,
                output,
            } => {
                let t = EntityKind::Template;
                if !produced_before(trace, t, template, idx) {
                    push(out, Code::StructDanglingRef, Mapping::R, t, template);
                } else if !qualified(trace, template) {
                    push(out, Code::RInputNotQualified, Mapping::R, t, template);
                }
                if let Some(class) = output {
                    if !declared(trace, EntityKind::Class, class) {
                        push(out, Code::StructDanglingRef, Mapping::R, t, template);
                    }
                }
                if let Some(p) = claimed {
                    if !declared(trace, EntityKind::Phenomenon, p) {
                        push(out, Code::RClaimedUnknown, Mapping::R, t, template);
                    } else if let Some(class) = output {
                        if !bound_classes(trace, p).contains(&class.as_str()) {
                            push(out, Code::RVerifyClassMismatch, Mapping::R, t, template);
                        }
                    }
                }
                let repeated = trace.events[..idx].iter().any(|e| {
                    matches!(e, MappingEvent::Recognize { batch: b, template: tt, claimed: c, .. }
                        if b == batch && tt == template && c == claimed)
                });
                if repeated {
                    push(out, Code::RNotPartial, Mapping::R, t, template);
                }
            }
        }
    }

    // Totality and functionality of P over every produced sample.
    for event in &trace.events {
        let MappingEvent::Sample { sample, .. } = event else {
            continue;
        };
        let images = trace
            .events
            .iter()
            .filter(|e| matches!(e, MappingEvent::Preprocess { input, .. } if input == sample))
            .count();
        match images {
            0 => push(out, Code::PNotTotal, Mapping::P, EntityKind::Sample, sample),
            1 => {}
            _ => push(out, Code::PNotFunction, Mapping::P, EntityKind::Sample, sample),
        }
    }

    // Totality and functionality of F over every produced preprocessed sample.
    for event in &trace.events {
        let MappingEvent::Preprocess { output: sp, .. } = event else {
            continue;
        };
        let mut images = 0;
        for e in &trace.events {
            if let MappingEvent::Extract { inputs, .. } = e {
                for input in inputs {
                    if input == sp {
                        images += 1;
                    }
                }
            }
        }
        match images {
            0 => push(out, Code::FNotTotal, Mapping::F, EntityKind::Preprocessed, sp),
            1 => {}
            _ => push(out, Code::FNotFunction, Mapping::F, EntityKind::Preprocessed, sp),
        }
    }
}

fn add<'a>(name: &'a str, names: &mut Vec<&'a str>) {
    if !names.contains(&name) {
        names.push(name);
    }
}

fn count(trace: &Trace, set: SetName) -> usize {
    let mut names: Vec<&str> = Vec::new();
    for (pos, decl) in trace.declarations.iter().enumerate() {
        match (decl, set) {
            (Declaration::Phenomenon(p), SetName::Phenomena) => add(&p.name, &mut names),
            (Declaration::Phenomenon(p), SetName::Enrolled) => {
                if is_first(trace, pos) && p.is_enrolled {
                    add(&p.name, &mut names)
                }
            }
            (Declaration::Class(c), SetName::Classes) => add(&c.name, &mut names),
            _ => {}
        }
    }
    for event in &trace.events {
        match (event, set) {
            (MappingEvent::Sample { sample, .. }, SetName::Samples) => add(sample, &mut names),
            (MappingEvent::Preprocess { output, .. }, SetName::Preprocessed) => {
                add(output, &mut names)
            }
            (MappingEvent::Extract { template, .. }, SetName::Templates) => {
                add(template, &mut names)
            }
            (MappingEvent::Extract { template, .. }, SetName::Qualified)
                if qualified(trace, template) =>
            {
                add(template, &mut names)
            }
            _ => {}
        }
    }
    names.len()
}

/// Recomputes every structural and mapping property by exhaustive scanning.
/// Its `(code, subject)` set always equals that of
/// [`validate_trace`](super::validate_trace); messages and order differ.
pub fn brute_force_validate(trace: &Trace) -> ValidationReport {
    let mut violations = Vec::new();
    structural(trace, &mut violations);
    events(trace, &mut violations);
    let checked_counts: BTreeMap<SetName, usize> =
        SetName::ALL.into_iter().map(|s| (s, count(trace, s))).collect();
    ValidationReport {
        violations,
        checked_counts,
    }
}
