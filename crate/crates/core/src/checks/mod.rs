//! Property checkers for the five pipeline mappings.
//!
//! Every checker is a pure function of the trace and reports problems as
//! [`Violation`]s instead of failing. [`validate_trace`] runs the
//! structural pass and all five checkers and orders the result by trace
//! position, then code. [`brute_force_validate`] recomputes the same
//! findings by exhaustive scanning and shares no code with the checkers.

mod extraction;
mod oracle;
mod preprocessing;
mod quality;
mod recognition;
mod sampling;
mod structural;
mod violation;

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::model::{all_cardinalities, Declaration, MappingEvent, SetName, Trace};

pub use oracle::brute_force_validate;
pub use violation::{Code, Mapping, Severity, UnknownCode, ValidationReport, Violation};

/// A violation together with the trace position it is reported at.
/// Declarations occupy positions `0..D`, events `D..D+E`.
#[derive(Debug, Clone)]
pub(crate) struct Finding {
    pub anchor: usize,
    pub violation: Violation,
}

/// Lookup tables shared by the checkers of one validation run.
pub(crate) struct Index<'a> {
    pub trace: &'a Trace,
    /// Position of the first declaration of each structure / phenomenon / class.
    pub structure_decl: HashMap<&'a str, usize>,
    pub phenomenon_decl: HashMap<&'a str, usize>,
    pub class_decl: HashMap<&'a str, usize>,
    /// Event index of the first event producing each sample / preprocessed / template.
    pub sample_made: HashMap<&'a str, usize>,
    pub preprocessed_made: HashMap<&'a str, usize>,
    pub template_made: HashMap<&'a str, usize>,
    /// Effective phenomena listing each structure.
    pub owners: HashMap<&'a str, BTreeSet<&'a str>>,
    pub qualified: HashSet<&'a str>,
}

impl<'a> Index<'a> {
    pub fn new(trace: &'a Trace) -> Self {
        let mut structure_decl = HashMap::new();
        let mut phenomenon_decl = HashMap::new();
        let mut class_decl = HashMap::new();
        let mut owners: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for (pos, decl) in trace.declarations.iter().enumerate() {
            match decl {
                Declaration::Structure(s) => {
                    structure_decl.entry(s.name.as_str()).or_insert(pos);
                }
                Declaration::Phenomenon(p) => {
                    if let std::collections::hash_map::Entry::Vacant(slot) =
                        phenomenon_decl.entry(p.name.as_str())
                    {
                        slot.insert(pos);
                        for st in &p.structures {
                            owners.entry(st.as_str()).or_default().insert(p.name.as_str());
                        }
                    }
                }
                Declaration::Class(c) => {
                    class_decl.entry(c.name.as_str()).or_insert(pos);
                }
            }
        }

        let mut sample_made = HashMap::new();
        let mut preprocessed_made = HashMap::new();
        let mut template_made = HashMap::new();
        for (idx, event) in trace.events.iter().enumerate() {
            match event {
                MappingEvent::Sample { sample, .. } => {
                    sample_made.entry(sample.as_str()).or_insert(idx);
                }
                MappingEvent::Preprocess { output, .. } => {
                    preprocessed_made.entry(output.as_str()).or_insert(idx);
                }
                MappingEvent::Extract { template, .. } => {
                    template_made.entry(template.as_str()).or_insert(idx);
                }
                _ => {}
            }
        }

        let qualified = trace.members(SetName::Qualified).into_iter().collect();

        Index {
            trace,
            structure_decl,
            phenomenon_decl,
            class_decl,
            sample_made,
            preprocessed_made,
            template_made,
            owners,
            qualified,
        }
    }

    pub fn event_anchor(&self, idx: usize) -> usize {
        self.trace.declarations.len() + idx
    }

    pub fn made_before(map: &HashMap<&str, usize>, name: &str, idx: usize) -> bool {
        map.get(name).is_some_and(|&first| first < idx)
    }
}

fn strip(findings: Vec<Finding>) -> Vec<Violation> {
    let mut findings = findings;
    findings.sort_by(|a, b| {
        (a.anchor, a.violation.code, &a.violation.subject).cmp(&(
            b.anchor,
            b.violation.code,
            &b.violation.subject,
        ))
    });
    findings.into_iter().map(|f| f.violation).collect()
}

/// Checks `S : B_p → S_m`.
pub fn check_sampling(trace: &Trace) -> Vec<Violation> {
    strip(sampling::check(&Index::new(trace)))
}

/// Checks `P : S_m → S_p`.
pub fn check_preprocessing(trace: &Trace) -> Vec<Violation> {
    strip(preprocessing::check(&Index::new(trace)))
}

/// Checks `F : S_p → T`.
pub fn check_extraction(trace: &Trace) -> Vec<Violation> {
    strip(extraction::check(&Index::new(trace)))
}

/// Checks `Q : T → T_q`.
pub fn check_quality(trace: &Trace) -> Vec<Violation> {
    strip(quality::check(&Index::new(trace)))
}

/// Checks `R : T_q → C` and its verification form over tuples.
pub fn check_recognition(trace: &Trace) -> Vec<Violation> {
    strip(recognition::check(&Index::new(trace)))
}

/// Declaration-level checks: duplicate identities, dangling declaration
/// references, duplicate class bindings and ownerless structures.
pub fn check_structure(trace: &Trace) -> Vec<Violation> {
    strip(structural::check(&Index::new(trace)))
}

/// Runs the structural pass and every mapping checker.
pub fn validate_trace(trace: &Trace) -> ValidationReport {
    let index = Index::new(trace);
    let mut findings = structural::check(&index);
    findings.extend(sampling::check(&index));
    findings.extend(preprocessing::check(&index));
    findings.extend(extraction::check(&index));
    findings.extend(quality::check(&index));
    findings.extend(recognition::check(&index));
    ValidationReport {
        violations: strip(findings),
        checked_counts: all_cardinalities(trace),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::*;

    pub fn structure(name: &str) -> Declaration {
        Declaration::Structure(StructureDecl { name: name.into() })
    }

    pub fn phenomenon(name: &str, enrolled: bool, structures: &[&str]) -> Declaration {
        Declaration::Phenomenon(PhenomenonDecl {
            name: name.into(),
            is_person: true,
            is_enrolled: enrolled,
            structures: structures.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn class(name: &str, bound: Option<&str>) -> Declaration {
        Declaration::Class(ClassDecl {
            name: name.into(),
            bound: bound.map(Into::into),
        })
    }

    pub fn sample(name: &str, sources: &[&str]) -> MappingEvent {
        MappingEvent::Sample {
            sample: name.into(),
            sources: sources.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn preprocess(output: &str, input: &str) -> MappingEvent {
        MappingEvent::Preprocess {
            output: output.into(),
            input: input.into(),
        }
    }

    pub fn extract(template: &str, inputs: &[&str]) -> MappingEvent {
        MappingEvent::Extract {
            template: template.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn quality(template: &str, passed: bool) -> MappingEvent {
        MappingEvent::Quality {
            template: template.into(),
            result: if passed {
                QualityResult::Passed
            } else {
                QualityResult::Failed
            },
        }
    }

    pub fn recognize(
        batch: &str,
        template: &str,
        claimed: Option<&str>,
        output: Option<&str>,
    ) -> MappingEvent {
        MappingEvent::Recognize {
            batch: batch.into(),
            template: template.into(),
            claimed: claimed.map(Into::into),
            output: output.map(Into::into),
        }
    }

    /// ph1 (enrolled) owns st1; c1 is bound to ph1; t1 passed quality.
    pub fn minimal_chain() -> Trace {
        Trace {
            arity: Arity::unimodal(),
            declarations: vec![
                structure("st1"),
                phenomenon("ph1", true, &["st1"]),
                class("c1", Some("ph1")),
            ],
            events: vec![
                sample("sm1", &["st1"]),
                preprocess("sp1", "sm1"),
                extract("t1", &["sp1"]),
                quality("t1", true),
            ],
        }
    }

    pub fn codes(violations: &[Violation]) -> Vec<(Code, String)> {
        violations
            .iter()
            .map(|v| (v.code, v.subject.name.clone()))
            .collect()
    }

    use super::{Code, Violation};
}
