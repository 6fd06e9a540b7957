use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EntityId, SetName};

/// Which part of the model a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mapping {
    S,
    P,
    F,
    Q,
    R,
    #[serde(rename = "structural")]
    Structural,
    #[serde(rename = "ontology")]
    Ontology,
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mapping::S => "S",
            Mapping::P => "P",
            Mapping::F => "F",
            Mapping::Q => "Q",
            Mapping::R => "R",
            Mapping::Structural => "structural",
            Mapping::Ontology => "ontology",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// The closed list of violation codes. The string forms are a stable
/// interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    SBadArity,
    PNotTotal,
    PNotFunction,
    FNotTotal,
    FNotFunction,
    FBadArity,
    QNotPartialFunction,
    RNotPartial,
    RInputNotQualified,
    RVerifyClassMismatch,
    RClaimedUnknown,
    StructDanglingRef,
    StructDuplicateId,
    OrphanEntity,
    OntStructureMultiOwner,
    OntSampleNoSource,
    OntPreprocMultiSample,
    OntTemplateNoInput,
    OntStatusInconsistent,
    OntSubsumptionBroken,
}

impl Code {
    pub const ALL: [Code; 20] = [
        Code::SBadArity,
        Code::PNotTotal,
        Code::PNotFunction,
        Code::FNotTotal,
        Code::FNotFunction,
        Code::FBadArity,
        Code::QNotPartialFunction,
        Code::RNotPartial,
        Code::RInputNotQualified,
        Code::RVerifyClassMismatch,
        Code::RClaimedUnknown,
        Code::StructDanglingRef,
        Code::StructDuplicateId,
        Code::OrphanEntity,
        Code::OntStructureMultiOwner,
        Code::OntSampleNoSource,
        Code::OntPreprocMultiSample,
        Code::OntTemplateNoInput,
        Code::OntStatusInconsistent,
        Code::OntSubsumptionBroken,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::SBadArity => "S_BAD_ARITY",
            Code::PNotTotal => "P_NOT_TOTAL",
            Code::PNotFunction => "P_NOT_FUNCTION",
            Code::FNotTotal => "F_NOT_TOTAL",
            Code::FNotFunction => "F_NOT_FUNCTION",
            Code::FBadArity => "F_BAD_ARITY",
            Code::QNotPartialFunction => "Q_NOT_PARTIAL_FUNCTION",
            Code::RNotPartial => "R_NOT_PARTIAL",
            Code::RInputNotQualified => "R_INPUT_NOT_QUALIFIED",
            Code::RVerifyClassMismatch => "R_VERIFY_CLASS_MISMATCH",
            Code::RClaimedUnknown => "R_CLAIMED_UNKNOWN",
            Code::StructDanglingRef => "STRUCT_DANGLING_REF",
            Code::StructDuplicateId => "STRUCT_DUPLICATE_ID",
            Code::OrphanEntity => "ORPHAN_ENTITY",
            Code::OntStructureMultiOwner => "ONT_STRUCTURE_MULTI_OWNER",
            Code::OntSampleNoSource => "ONT_SAMPLE_NO_SOURCE",
            Code::OntPreprocMultiSample => "ONT_PREPROC_MULTI_SAMPLE",
            Code::OntTemplateNoInput => "ONT_TEMPLATE_NO_INPUT",
            Code::OntStatusInconsistent => "ONT_STATUS_INCONSISTENT",
            Code::OntSubsumptionBroken => "ONT_SUBSUMPTION_BROKEN",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::OrphanEntity | Code::OntPreprocMultiSample => Severity::Warning,
            _ => Severity::Error,
        }
    }

    /// The model property a code stands for.
    pub fn explain(self) -> &'static str {
        match self {
            Code::SBadArity => {
                "Sampling arity: every sample is taken on behalf of exactly μ structures when \
                 the multimodal tuple is formed at sampling, and of exactly one structure otherwise."
            }
            Code::PNotTotal => {
                "Preprocessing totality: preprocessing is a function on the set of samples, so \
                 every sample must be preprocessed. This sample never was."
            }
            Code::PNotFunction => {
                "Preprocessing is a function: a sample has exactly one preprocessed image. This \
                 sample was preprocessed more than once. Distinct samples sharing one \
                 preprocessed sample is allowed."
            }
            Code::FNotTotal => {
                "Extraction totality: feature extraction is a function on the set of \
                 preprocessed samples, so every preprocessed sample must feed an extraction. \
                 This one never did."
            }
            Code::FNotFunction => {
                "Extraction is a function: a preprocessed sample feeds exactly one extracted \
                 template. This one fed several. Distinct inputs sharing one template is allowed."
            }
            Code::FBadArity => {
                "Extraction arity: a template is extracted from exactly μ preprocessed samples \
                 when the multimodal tuple is formed at extraction, and from exactly one otherwise."
            }
            Code::QNotPartialFunction => {
                "Quality control is a partial function: each template has zero or one quality \
                 verdict. This template has several."
            }
            Code::RNotPartial => {
                "Recognition is a partial function: within one batch every input (template, or \
                 template and claimed identity) has zero or one image. This input was recognized \
                 more than once in the same batch."
            }
            Code::RInputNotQualified => {
                "Recognition domain: only templates that passed quality control may be recognized."
            }
            Code::RVerifyClassMismatch => {
                "Verification: a (template, claimed identity) tuple may only be mapped to the \
                 class bound to the claimed phenomenon, or left unrecognized."
            }
            Code::RClaimedUnknown => {
                "Verification: the claimed identity of a tuple must be a declared phenomenon."
            }
            Code::StructDanglingRef => {
                "Declaration before use: every referenced entity must be declared, or produced \
                 by an earlier event, before it is referenced. Sample sources must be structures \
                 owned by a declared phenomenon; class bindings must name declared phenomena."
            }
            Code::StructDuplicateId => {
                "Identity: no two declarations share a (kind, name), no two classes are bound to \
                 the same phenomenon, and the unrecognized class ν is never declared."
            }
            Code::OrphanEntity => {
                "A declared structure belongs to no phenomenon, so nothing sampled from it can \
                 be traced back to the set of phenomena."
            }
            Code::OntStructureMultiOwner => {
                "Class model: a structure is part of exactly one phenomenon."
            }
            Code::OntSampleNoSource => {
                "Class model: a sample is made on behalf of one or more structures, more than \
                 one only in systems that form the multimodal tuple at sampling."
            }
            Code::OntPreprocMultiSample => {
                "Class model: a preprocessed sample is derived from exactly one sample. Reported \
                 as a warning because distinct samples may legitimately collide under \
                 preprocessing."
            }
            Code::OntTemplateNoInput => {
                "Class model: a template is extracted from one or more preprocessed samples, \
                 more than one only in systems that form the multimodal tuple at extraction."
            }
            Code::OntStatusInconsistent => {
                "Status attribute: a template's status is untested, failed or passed. Conflicting \
                 quality verdicts leave it without a consistent value."
            }
            Code::OntSubsumptionBroken => {
                "Class model: a class corresponds to an enrolled phenomenon. This class is bound \
                 to a phenomenon that is not enrolled."
            }
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown violation code `{0}`")]
pub struct UnknownCode(pub String);

impl FromStr for Code {
    type Err = UnknownCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Code::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCode(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: Code,
    pub mapping: Mapping,
    pub subject: EntityId,
    pub message: String,
    pub severity: Severity,
}

impl Violation {
    pub fn new(code: Code, mapping: Mapping, subject: EntityId, message: impl Into<String>) -> Self {
        Violation {
            code,
            mapping,
            subject,
            message: message.into(),
            severity: code.severity(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `code<TAB>kind:name<TAB>message`
    pub fn machine_line(&self) -> String {
        format!("{}\t{}\t{}", self.code, self.subject, self.message)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{level}[{}] {} ({}): {}",
            self.code, self.subject, self.mapping, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub checked_counts: BTreeMap<SetName, usize>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_error())
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// The `(code, subject)` pairs, as compared by the differential oracle.
    pub fn code_set(&self) -> BTreeSet<(Code, EntityId)> {
        self.violations
            .iter()
            .map(|v| (v.code, v.subject.clone()))
            .collect()
    }

    pub fn contains(&self, code: Code) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntityKind;

    #[test]
    fn codes_round_trip_through_strings() {
        for code in Code::ALL {
            assert_eq!(code.as_str().parse::<Code>().unwrap(), code);
            let json = serde_json::to_string(&code).unwrap();
            assert_eq!(json, format!("\"{}\"", code.as_str()));
        }
        assert!("P_NOT_SURJECTIVE".parse::<Code>().is_err());
    }

    #[test]
    fn only_orphans_and_collisions_are_warnings() {
        let warnings: Vec<_> = Code::ALL
            .into_iter()
            .filter(|c| c.severity() == Severity::Warning)
            .collect();
        assert_eq!(warnings, vec![Code::OrphanEntity, Code::OntPreprocMultiSample]);
    }

    #[test]
    fn machine_line_layout() {
        let v = Violation::new(
            Code::PNotTotal,
            Mapping::P,
            EntityId::new(EntityKind::Sample, "sm1"),
            "sample is never preprocessed",
        );
        assert_eq!(v.machine_line(), "P_NOT_TOTAL\tsample:sm1\tsample is never preprocessed");
    }
}
