//! Instance-level conformance against the fixed class model:
//!
//! ```text
//! Phenomenon 1 ── 0..* Structure          Person ⊑ Phenomenon
//! Sample 0..* ── 1..* Structure           EnrolledPhenomenon ⊑ Phenomenon
//! PreprocessedSample 0..* ── 1 Sample     EnrolledPerson ⊑ Person, EnrolledPhenomenon
//! ExtractedStructure 0..* ── 1..* PreprocessedSample
//! ExtractedStructure 0..* ── 0..* Class   Class ~ EnrolledPhenomenon
//! ExtractedStructure.status ∈ {untested, failed, passed}
//! ```
//!
//! Association counts are taken over the whole trace, so a template may be
//! classified any number of times across batches.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{Code, Mapping, Violation};
use crate::model::{EntityId, EntityKind, MappingEvent, QualityResult, SetName, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusValue {
    Untested,
    Failed,
    Passed,
}

impl StatusValue {
    /// Only `passed` places a template in `T_q`.
    pub fn is_qualified(self) -> bool {
        self == StatusValue::Passed
    }
}

impl fmt::Display for StatusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatusValue::Untested => "untested",
            StatusValue::Failed => "failed",
            StatusValue::Passed => "passed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    /// Every phenomenon is a person.
    Narrower,
    /// No phenomenon is a person.
    Broader,
    Mixed,
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perspective::Narrower => "narrower",
            Perspective::Broader => "broader",
            Perspective::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub violations: Vec<Violation>,
    pub perspective: Perspective,
}

impl ConformanceReport {
    pub fn has_errors(&self) -> bool {
        self.violations.iter().any(Violation::is_error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("template `{0}` is never extracted in this trace")]
    UnknownTemplate(String),
}

/// Status attribute of a template: mirrors its first quality verdict.
pub fn derive_status(trace: &Trace, template: &str) -> Result<StatusValue, OntologyError> {
    let extracted = trace
        .events
        .iter()
        .any(|e| matches!(e, MappingEvent::Extract { template: t, .. } if t == template));
    if !extracted {
        return Err(OntologyError::UnknownTemplate(template.to_string()));
    }
    Ok(match trace.quality_of(template) {
        None => StatusValue::Untested,
        Some(QualityResult::Failed) => StatusValue::Failed,
        Some(QualityResult::Passed) => StatusValue::Passed,
    })
}

pub fn perspective(trace: &Trace) -> Perspective {
    let phenomena = trace.effective_phenomena();
    let persons = phenomena.iter().filter(|p| p.is_person).count();
    if persons == phenomena.len() {
        Perspective::Narrower
    } else if persons == 0 {
        Perspective::Broader
    } else {
        Perspective::Mixed
    }
}

fn ont(code: Code, subject: EntityId, message: impl Into<String>) -> Violation {
    Violation::new(code, Mapping::Ontology, subject, message)
}

/// Checks association multiplicities, the status attribute and the
/// class-to-enrolled-phenomenon correspondence.
pub fn check_conformance(trace: &Trace) -> ConformanceReport {
    let mut violations = Vec::new();

    // Structure is part of exactly one Phenomenon.
    let mut owners: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for p in trace.effective_phenomena() {
        for st in &p.structures {
            owners.entry(st.as_str()).or_default().insert(p.name.as_str());
        }
    }
    for st in trace.effective_structures() {
        let count = owners.get(st.name.as_str()).map_or(0, BTreeSet::len);
        if count != 1 {
            violations.push(ont(
                Code::OntStructureMultiOwner,
                EntityId::new(EntityKind::Structure, &st.name),
                format!("structure is part of {count} phenomena, expected exactly one"),
            ));
        }
    }

    let sources = trace.arity.sample_sources();
    let inputs = trace.arity.extract_inputs();
    let mut derived_from: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    let mut verdicts: HashMap<&str, HashSet<QualityResult>> = HashMap::new();

    for event in &trace.events {
        match event {
            MappingEvent::Sample { sources: s, .. } if s.len() != sources => {
                violations.push(ont(
                    Code::OntSampleNoSource,
                    event.subject(),
                    format!(
                        "sample is made on behalf of {} structures; this system requires {sources}",
                        s.len()
                    ),
                ));
            }
            MappingEvent::Preprocess { output, input } => {
                derived_from.entry(output).or_default().insert(input);
            }
            MappingEvent::Extract { inputs: i, .. } if i.len() != inputs => {
                violations.push(ont(
                    Code::OntTemplateNoInput,
                    event.subject(),
                    format!(
                        "template is extracted from {} preprocessed samples; this system requires {inputs}",
                        i.len()
                    ),
                ));
            }
            MappingEvent::Quality { template, result } => {
                verdicts.entry(template).or_default().insert(*result);
            }
            _ => {}
        }
    }

    let mut multi: Vec<_> = derived_from
        .into_iter()
        .filter(|(_, samples)| samples.len() > 1)
        .collect();
    multi.sort();
    for (sp, samples) in multi {
        violations.push(ont(
            Code::OntPreprocMultiSample,
            EntityId::new(EntityKind::Preprocessed, sp),
            format!(
                "derived from {} distinct samples: {}",
                samples.len(),
                samples.into_iter().collect::<Vec<_>>().join(", ")
            ),
        ));
    }

    let mut conflicting: Vec<_> = verdicts
        .into_iter()
        .filter(|(_, results)| results.len() > 1)
        .map(|(t, _)| t)
        .collect();
    conflicting.sort();
    for t in conflicting {
        violations.push(ont(
            Code::OntStatusInconsistent,
            EntityId::new(EntityKind::Template, t),
            "template has both passed and failed quality verdicts",
        ));
    }

    let enrolled = trace.members(SetName::Enrolled);
    for class in trace.effective_classes() {
        let Some(bound) = class.bound.as_deref() else {
            continue;
        };
        if trace.phenomenon(bound).is_some() && !enrolled.contains(bound) {
            violations.push(ont(
                Code::OntSubsumptionBroken,
                EntityId::new(EntityKind::Class, &class.name),
                format!("class corresponds to `{bound}`, which is not an enrolled phenomenon"),
            ));
        }
    }

    ConformanceReport {
        violations,
        perspective: perspective(trace),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::fixtures::*;
    use crate::model::{Arity, Declaration, Placement};

    fn codes(report: &ConformanceReport) -> Vec<(Code, String)> {
        report
            .violations
            .iter()
            .map(|v| (v.code, v.subject.name.clone()))
            .collect()
    }

    #[test]
    fn minimal_chain_conforms() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b", "t1", None, Some("c1")));
        let report = check_conformance(&trace);
        assert!(report.violations.is_empty());
        assert_eq!(report.perspective, Perspective::Narrower);
    }

    #[test]
    fn structure_with_two_owners() {
        let mut trace = minimal_chain();
        trace.declarations.push(phenomenon("ph2", false, &["st1"]));
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntStructureMultiOwner, "st1".into())]
        );
    }

    #[test]
    fn mixed_and_broader_perspectives() {
        let mut trace = minimal_chain();
        trace.declarations.push(Declaration::Phenomenon(crate::model::PhenomenonDecl {
            name: "ph2".into(),
            is_person: false,
            is_enrolled: false,
            structures: vec![],
        }));
        assert_eq!(check_conformance(&trace).perspective, Perspective::Mixed);
        for decl in &mut trace.declarations {
            if let Declaration::Phenomenon(p) = decl {
                p.is_person = false;
            }
        }
        assert_eq!(check_conformance(&trace).perspective, Perspective::Broader);
    }

    #[test]
    fn multi_source_sample_only_in_sampling_side_multimodal() {
        let mut trace = minimal_chain();
        trace.declarations.insert(0, structure("st2"));
        if let Declaration::Phenomenon(p) = &mut trace.declarations[2] {
            p.structures.push("st2".into());
        }
        trace.events[0] = sample("sm1", &["st1", "st2"]);
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntSampleNoSource, "sm1".into())]
        );
        trace.arity = Arity::new(2, Placement::Sampling).unwrap();
        assert!(check_conformance(&trace).violations.is_empty());
    }

    #[test]
    fn sample_without_source() {
        let mut trace = minimal_chain();
        trace.events[0] = sample("sm1", &[]);
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntSampleNoSource, "sm1".into())]
        );
    }

    #[test]
    fn template_without_input() {
        let mut trace = minimal_chain();
        trace.events[2] = extract("t1", &[]);
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntTemplateNoInput, "t1".into())]
        );
    }

    #[test]
    fn preprocessed_sample_from_two_samples_is_a_warning() {
        let mut trace = minimal_chain();
        trace.events.push(sample("sm2", &["st1"]));
        trace.events.push(preprocess("sp1", "sm2"));
        let report = check_conformance(&trace);
        assert_eq!(codes(&report), vec![(Code::OntPreprocMultiSample, "sp1".into())]);
        assert!(!report.has_errors());
    }

    #[test]
    fn conflicting_verdicts() {
        let mut trace = minimal_chain();
        trace.events.push(quality("t1", false));
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntStatusInconsistent, "t1".into())]
        );
    }

    #[test]
    fn class_bound_to_non_enrolled_phenomenon() {
        let mut trace = minimal_chain();
        trace.declarations.push(phenomenon("ph2", false, &[]));
        trace.declarations.push(class("c2", Some("ph2")));
        assert_eq!(
            codes(&check_conformance(&trace)),
            vec![(Code::OntSubsumptionBroken, "c2".into())]
        );
    }

    #[test]
    fn status_values() {
        let mut trace = minimal_chain();
        assert_eq!(derive_status(&trace, "t1"), Ok(StatusValue::Passed));
        trace.events[3] = quality("t1", false);
        assert_eq!(derive_status(&trace, "t1"), Ok(StatusValue::Failed));
        trace.events.pop();
        assert_eq!(derive_status(&trace, "t1"), Ok(StatusValue::Untested));
        assert_eq!(
            derive_status(&trace, "t9"),
            Err(OntologyError::UnknownTemplate("t9".into()))
        );
    }
}
