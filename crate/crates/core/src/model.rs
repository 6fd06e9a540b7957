//! The set model of a recognition pipeline.
//!
//! A [`Trace`] holds declarations (structures, phenomena, classes) and an
//! ordered list of mapping events. Samples, preprocessed samples and
//! templates are never declared: their sets are the images of the events
//! that produce them.
//!
//! Attribute lookups always use the *first* declaration of a given
//! `(kind, name)`; later duplicates are reported by validation and
//! otherwise ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the unrecognized class. It is never declared and never a
/// member of `C`; a recognize event without output stands for it.
pub const UNRECOGNIZED: &str = "ν";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Phenomenon,
    Structure,
    Sample,
    Preprocessed,
    Template,
    Class,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Phenomenon => "phenomenon",
            EntityKind::Structure => "structure",
            EntityKind::Sample => "sample",
            EntityKind::Preprocessed => "preprocessed",
            EntityKind::Template => "template",
            EntityKind::Class => "class",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Typed identity of an entity. Names are opaque; identity is `(kind, name)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId {
    pub kind: EntityKind,
    pub name: String,
}

impl EntityId {
    pub fn new(kind: EntityKind, name: impl Into<String>) -> Self {
        EntityId {
            kind,
            name: name.into(),
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.name)
    }
}

/// Where the multimodal tuple is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// One sample is taken on behalf of μ structures.
    Sampling,
    /// One template is extracted from μ preprocessed samples.
    Extraction,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Sampling => "sampling",
            Placement::Extraction => "extraction",
        }
    }
}

impl FromStr for Placement {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sampling" => Ok(Placement::Sampling),
            "extraction" => Ok(Placement::Extraction),
            other => Err(ModelError::UnknownPlacement(other.to_string())),
        }
    }
}

/// Multimodal arity μ together with the stage that consumes the tuple.
/// The other stage always has arity 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arity {
    mu: NonZeroU32,
    placement: Placement,
}

impl Arity {
    pub fn new(mu: u32, placement: Placement) -> Result<Self, ModelError> {
        let mu = NonZeroU32::new(mu).ok_or(ModelError::ZeroArity)?;
        Ok(Arity { mu, placement })
    }

    pub fn unimodal() -> Self {
        Arity {
            mu: NonZeroU32::MIN,
            placement: Placement::Sampling,
        }
    }

    pub fn mu(&self) -> u32 {
        self.mu.get()
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn is_multimodal(&self) -> bool {
        self.mu.get() > 1
    }

    /// Number of structures each sample event must list.
    pub fn sample_sources(&self) -> usize {
        match self.placement {
            Placement::Sampling => self.mu.get() as usize,
            Placement::Extraction => 1,
        }
    }

    /// Number of preprocessed samples each extract event must list.
    pub fn extract_inputs(&self) -> usize {
        match self.placement {
            Placement::Sampling => 1,
            Placement::Extraction => self.mu.get() as usize,
        }
    }
}

impl Default for Arity {
    fn default() -> Self {
        Arity::unimodal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureDecl {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhenomenonDecl {
    pub name: String,
    pub is_person: bool,
    pub is_enrolled: bool,
    pub structures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    /// Enrolled phenomenon this class corresponds to, if any.
    pub bound: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Structure(StructureDecl),
    Phenomenon(PhenomenonDecl),
    Class(ClassDecl),
}

impl Declaration {
    pub fn id(&self) -> EntityId {
        match self {
            Declaration::Structure(d) => EntityId::new(EntityKind::Structure, &d.name),
            Declaration::Phenomenon(d) => EntityId::new(EntityKind::Phenomenon, &d.name),
            Declaration::Class(d) => EntityId::new(EntityKind::Class, &d.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityResult {
    Passed,
    Failed,
}

impl QualityResult {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityResult::Passed => "passed",
            QualityResult::Failed => "failed",
        }
    }
}

/// One edge of one of the five pipeline mappings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingEvent {
    /// `S`: a sample taken on behalf of structures.
    Sample { sample: String, sources: Vec<String> },
    /// `P`: a sample preprocessed into a preprocessed sample.
    Preprocess { output: String, input: String },
    /// `F`: a template extracted from preprocessed samples.
    Extract { template: String, inputs: Vec<String> },
    /// `Q`: the quality verdict on a template.
    Quality {
        template: String,
        result: QualityResult,
    },
    /// `R`: one application of recognition inside a batch. `claimed`
    /// makes the event a verification tuple; `output: None` is ν.
    Recognize {
        batch: String,
        template: String,
        claimed: Option<String>,
        output: Option<String>,
    },
}

impl MappingEvent {
    /// The entity an event produces, or acts on for quality and recognize.
    pub fn subject(&self) -> EntityId {
        match self {
            MappingEvent::Sample { sample, .. } => EntityId::new(EntityKind::Sample, sample),
            MappingEvent::Preprocess { output, .. } => {
                EntityId::new(EntityKind::Preprocessed, output)
            }
            MappingEvent::Extract { template, .. }
            | MappingEvent::Quality { template, .. }
            | MappingEvent::Recognize { template, .. } => {
                EntityId::new(EntityKind::Template, template)
            }
        }
    }
}

/// The observed behaviour of one biometric system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub arity: Arity,
    pub declarations: Vec<Declaration>,
    pub events: Vec<MappingEvent>,
}

/// The seven sets of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetName {
    #[serde(rename = "B_p")]
    Phenomena,
    #[serde(rename = "B_e")]
    Enrolled,
    #[serde(rename = "S_m")]
    Samples,
    #[serde(rename = "S_p")]
    Preprocessed,
    #[serde(rename = "T")]
    Templates,
    #[serde(rename = "T_q")]
    Qualified,
    #[serde(rename = "C")]
    Classes,
}

impl SetName {
    pub const ALL: [SetName; 7] = [
        SetName::Phenomena,
        SetName::Enrolled,
        SetName::Samples,
        SetName::Preprocessed,
        SetName::Templates,
        SetName::Qualified,
        SetName::Classes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SetName::Phenomena => "B_p",
            SetName::Enrolled => "B_e",
            SetName::Samples => "S_m",
            SetName::Preprocessed => "S_p",
            SetName::Templates => "T",
            SetName::Qualified => "T_q",
            SetName::Classes => "C",
        }
    }
}

impl fmt::Display for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetName {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SetName::ALL
            .into_iter()
            .find(|set| set.as_str() == s)
            .ok_or_else(|| ModelError::UnknownSet(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown set name `{0}` (expected one of B_p, B_e, S_m, S_p, T, T_q, C)")]
    UnknownSet(String),
    #[error("unknown multimodal placement `{0}` (expected sampling or extraction)")]
    UnknownPlacement(String),
    #[error("multimodal arity must be at least 1")]
    ZeroArity,
}

impl Trace {
    pub fn new(arity: Arity) -> Self {
        Trace {
            arity,
            declarations: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn structures(&self) -> impl Iterator<Item = &StructureDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Structure(s) => Some(s),
            _ => None,
        })
    }

    pub fn phenomena(&self) -> impl Iterator<Item = &PhenomenonDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Phenomenon(p) => Some(p),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Class(c) => Some(c),
            _ => None,
        })
    }

    /// First declaration of every phenomenon name, in declaration order.
    pub fn effective_phenomena(&self) -> Vec<&PhenomenonDecl> {
        let mut seen = HashSet::new();
        self.phenomena()
            .filter(|p| seen.insert(p.name.as_str()))
            .collect()
    }

    /// First declaration of every class name, in declaration order.
    pub fn effective_classes(&self) -> Vec<&ClassDecl> {
        let mut seen = HashSet::new();
        self.classes().filter(|c| seen.insert(c.name.as_str())).collect()
    }

    pub fn effective_structures(&self) -> Vec<&StructureDecl> {
        let mut seen = HashSet::new();
        self.structures()
            .filter(|s| seen.insert(s.name.as_str()))
            .collect()
    }

    pub fn phenomenon(&self, name: &str) -> Option<&PhenomenonDecl> {
        self.phenomena().find(|p| p.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes().find(|c| c.name == name)
    }

    /// Quality verdict of a template: the first quality event wins.
    pub fn quality_of(&self, template: &str) -> Option<QualityResult> {
        self.events.iter().find_map(|e| match e {
            MappingEvent::Quality {
                template: t,
                result,
            } if t == template => Some(*result),
            _ => None,
        })
    }

    /// Labels of all recognition batches in first-appearance order.
    pub fn batches(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.events
            .iter()
            .filter_map(|e| match e {
                MappingEvent::Recognize { batch, .. } => Some(batch.as_str()),
                _ => None,
            })
            .filter(|b| seen.insert(*b))
            .collect()
    }

    /// Recognize events of one batch, in trace order.
    pub fn batch_events<'a>(&'a self, label: &'a str) -> impl Iterator<Item = RecognizeRef<'a>> + 'a {
        self.events.iter().filter_map(move |e| match e {
            MappingEvent::Recognize {
                batch,
                template,
                claimed,
                output,
            } if batch == label => Some(RecognizeRef {
                template,
                claimed: claimed.as_deref(),
                output: output.as_deref(),
            }),
            _ => None,
        })
    }

    /// Classes bound to a phenomenon, over effective class declarations.
    pub fn classes_bound_to(&self, phenomenon: &str) -> Vec<&str> {
        self.effective_classes()
            .into_iter()
            .filter(|c| c.bound.as_deref() == Some(phenomenon))
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Whether the class bindings witness `C ≃ B_e`: every class is bound,
    /// targets are distinct enrolled phenomena, and every enrolled
    /// phenomenon is a target. An empty `C` never counts.
    pub fn classes_match_enrolled(&self) -> bool {
        let classes = self.effective_classes();
        if classes.is_empty() {
            return false;
        }
        let enrolled = self.members(SetName::Enrolled);
        let mut targets = HashSet::new();
        for class in &classes {
            let Some(bound) = class.bound.as_deref() else {
                return false;
            };
            if !enrolled.contains(bound) || !targets.insert(bound) {
                return false;
            }
        }
        targets.len() == enrolled.len()
    }

    /// Member names of a set at the end of the trace.
    pub fn members(&self, which: SetName) -> BTreeSet<&str> {
        match which {
            SetName::Phenomena => self.phenomena().map(|p| p.name.as_str()).collect(),
            SetName::Enrolled => self
                .effective_phenomena()
                .into_iter()
                .filter(|p| p.is_enrolled)
                .map(|p| p.name.as_str())
                .collect(),
            SetName::Classes => self.classes().map(|c| c.name.as_str()).collect(),
            SetName::Samples => self
                .events
                .iter()
                .filter_map(|e| match e {
                    MappingEvent::Sample { sample, .. } => Some(sample.as_str()),
                    _ => None,
                })
                .collect(),
            SetName::Preprocessed => self
                .events
                .iter()
                .filter_map(|e| match e {
                    MappingEvent::Preprocess { output, .. } => Some(output.as_str()),
                    _ => None,
                })
                .collect(),
            SetName::Templates => self
                .events
                .iter()
                .filter_map(|e| match e {
                    MappingEvent::Extract { template, .. } => Some(template.as_str()),
                    _ => None,
                })
                .collect(),
            SetName::Qualified => {
                let mut first: HashMap<&str, QualityResult> = HashMap::new();
                for event in &self.events {
                    if let MappingEvent::Quality { template, result } = event {
                        first.entry(template.as_str()).or_insert(*result);
                    }
                }
                self.members(SetName::Templates)
                    .into_iter()
                    .filter(|t| first.get(t) == Some(&QualityResult::Passed))
                    .collect()
            }
        }
    }

    /// Distinct verification tuples `(τ, π)` with `τ ∈ T_q` and `π ∈ B_p`
    /// observed anywhere in the trace.
    pub fn qualified_tuples(&self) -> BTreeSet<(&str, &str)> {
        let qualified = self.members(SetName::Qualified);
        let phenomena = self.members(SetName::Phenomena);
        self.events
            .iter()
            .filter_map(|e| match e {
                MappingEvent::Recognize {
                    template,
                    claimed: Some(claimed),
                    ..
                } if qualified.contains(template.as_str())
                    && phenomena.contains(claimed.as_str()) =>
                {
                    Some((template.as_str(), claimed.as_str()))
                }
                _ => None,
            })
            .collect()
    }
}

/// Borrowed view of one recognize event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecognizeRef<'a> {
    pub template: &'a str,
    pub claimed: Option<&'a str>,
    pub output: Option<&'a str>,
}

fn kind_of(which: SetName) -> EntityKind {
    match which {
        SetName::Phenomena | SetName::Enrolled => EntityKind::Phenomenon,
        SetName::Samples => EntityKind::Sample,
        SetName::Preprocessed => EntityKind::Preprocessed,
        SetName::Templates | SetName::Qualified => EntityKind::Template,
        SetName::Classes => EntityKind::Class,
    }
}

/// Members of one of the seven sets at the end of the trace.
pub fn set_of(trace: &Trace, which: SetName) -> BTreeSet<EntityId> {
    let kind = kind_of(which);
    trace
        .members(which)
        .into_iter()
        .map(|name| EntityId::new(kind, name))
        .collect()
}

/// `c(·)`: the cardinality of a set.
pub fn cardinality(trace: &Trace, which: SetName) -> usize {
    trace.members(which).len()
}

/// Cardinalities of all seven sets.
pub fn all_cardinalities(trace: &Trace) -> BTreeMap<SetName, usize> {
    SetName::ALL
        .into_iter()
        .map(|set| (set, cardinality(trace, set)))
        .collect()
}
