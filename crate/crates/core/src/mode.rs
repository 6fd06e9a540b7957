//! System kind and operating phase of one recognition batch, inferred from
//! the cardinalities of the recognition mapping.
//!
//! `Υ` is the number of distinct inputs in the batch (templates, or
//! `(template, claimed)` tuples for verification) and `Ω = c(C)`.
//!
//! | kind \ phase   | normal              | training                  | enrollment                              |
//! |----------------|---------------------|---------------------------|-----------------------------------------|
//! | verification   | `1 : 1, C ≃ B_e`    | `m : 1, c(T_q⁺) = m`      | `n′ · k : 1, c(T_q)/k = c(B_e) = n′`    |
//! | classification | `1 : n, c(C) = n`   | `m : n, c(T_q) = m, c(C) = n` | `n · k : n, c(T_q)/k = c(C) = n`    |
//! | identification | `1 : n′, c(B_e) = n′` | `m : n′, c(T_q) = m, c(B_e) = n′` | `n′ · k : n′, c(T_q)/k = c(B_e) = n′` |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{SetName, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Verification,
    Identification,
    Classification,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Training,
    Enrollment,
    Ambiguous,
    Unknown,
}

impl Kind {
    pub const DEFINITE: [Kind; 3] = [Kind::Verification, Kind::Classification, Kind::Identification];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Verification => "verification",
            Kind::Identification => "identification",
            Kind::Classification => "classification",
            Kind::Unknown => "unknown",
        }
    }
}

impl Phase {
    pub const DEFINITE: [Phase; 3] = [Phase::Normal, Phase::Training, Phase::Enrollment];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Training => "training",
            Phase::Enrollment => "enrollment",
            Phase::Ambiguous => "ambiguous",
            Phase::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = ModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::DEFINITE
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ModeError::UnknownKind(s.to_string()))
    }
}

impl FromStr for Phase {
    type Err = ModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::DEFINITE
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ModeError::UnknownPhase(s.to_string()))
    }
}

/// The cardinality notation of each of the nine (kind, phase) pairs:
/// the short ratio and the full form with its side conditions.
pub fn denotation(kind: Kind, phase: Phase) -> Option<(&'static str, &'static str)> {
    use Kind::*;
    use Phase::*;
    Some(match (kind, phase) {
        (Verification, Normal) => ("1 : 1", "1 : 1, C ≃ B_e"),
        (Classification, Normal) => ("1 : n", "1 : n, c(C) = n"),
        (Identification, Normal) => ("1 : n′", "1 : n′, c(B_e) = n′"),
        (Verification, Training) => ("m : 1", "m : 1, c(T_q⁺) = m"),
        (Classification, Training) => ("m : n", "m : n, c(T_q) = m, c(C) = n"),
        (Identification, Training) => ("m : n′", "m : n′, c(T_q) = m, c(B_e) = n′"),
        (Verification, Enrollment) => ("n′ · k : 1", "n′ · k : 1, c(T_q)/k = c(B_e) = n′"),
        (Classification, Enrollment) => ("n · k : n", "n · k : n, c(T_q)/k = c(C) = n"),
        (Identification, Enrollment) => ("n′ · k : n′", "n′ · k : n′, c(T_q)/k = c(B_e) = n′"),
        _ => return None,
    })
}

/// Accepted enrollment group sizes `⟨min, max⟩`. A missing `max` means `Υ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KInterval {
    pub min: usize,
    pub max: Option<usize>,
}

impl Default for KInterval {
    fn default() -> Self {
        KInterval { min: 1, max: None }
    }
}

impl KInterval {
    pub fn new(min: usize, max: Option<usize>) -> Result<Self, ModeError> {
        if min == 0 || max.is_some_and(|max| max < min) {
            return Err(ModeError::BadInterval { min, max });
        }
        Ok(KInterval { min, max })
    }

    pub fn fixed(k: usize) -> Result<Self, ModeError> {
        KInterval::new(k, Some(k))
    }

    fn contains(&self, k: usize, upsilon: usize) -> bool {
        k >= self.min && k <= self.max.unwrap_or(upsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeError {
    #[error("batch label is empty")]
    EmptyBatch,
    #[error("no recognize events carry batch label `{0}`")]
    UnknownBatch(String),
    #[error("invalid k interval ⟨{min}, {max:?}⟩: need 1 ≤ min ≤ max")]
    BadInterval { min: usize, max: Option<usize> },
    #[error("unknown system kind `{0}` (expected verification, identification or classification)")]
    UnknownKind(String),
    #[error("unknown phase `{0}` (expected normal, training or enrollment)")]
    UnknownPhase(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeReport {
    pub batch: String,
    pub kind: Kind,
    pub phase: Phase,
    /// Both matching phases when `phase` is ambiguous, else empty.
    pub candidates: Vec<Phase>,
    /// Υ: distinct inputs (tuples for verification-shaped events).
    pub upsilon: usize,
    /// Distinct templates among the inputs.
    pub distinct_templates: usize,
    /// Ω = c(C).
    pub omega: usize,
    /// c(T_q⁺) for tuple batches, c(T_q) otherwise.
    pub m: usize,
    pub n: usize,
    pub n_prime: usize,
    /// Group size per class in class declaration order; set when the
    /// batch has enrollment shape.
    pub k_sizes: Vec<usize>,
    pub c_equiv_be: bool,
    pub ratio: Option<String>,
    pub denotation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Bare,
    Tuples,
    Mixed,
}

struct Batch<'a> {
    shape: Shape,
    /// Distinct `(template, claimed)` inputs with every output they got.
    inputs: BTreeMap<(&'a str, Option<&'a str>), Vec<Option<&'a str>>>,
}

fn load<'a>(trace: &'a Trace, label: &'a str) -> Result<Batch<'a>, ModeError> {
    if label.is_empty() {
        return Err(ModeError::EmptyBatch);
    }
    let mut inputs: BTreeMap<_, Vec<_>> = BTreeMap::new();
    let (mut tuples, mut bare) = (0, 0);
    for event in trace.batch_events(label) {
        if event.claimed.is_some() {
            tuples += 1;
        } else {
            bare += 1;
        }
        inputs
            .entry((event.template, event.claimed))
            .or_default()
            .push(event.output);
    }
    let shape = match (tuples, bare) {
        (0, 0) => return Err(ModeError::UnknownBatch(label.to_string())),
        (_, 0) => Shape::Tuples,
        (0, _) => Shape::Bare,
        _ => Shape::Mixed,
    };
    Ok(Batch { shape, inputs })
}

fn kind_of(trace: &Trace, batch: &Batch<'_>) -> Kind {
    match (batch.shape, trace.classes_match_enrolled()) {
        (Shape::Tuples, true) => Kind::Verification,
        (Shape::Bare, true) => Kind::Identification,
        (Shape::Bare, false) => Kind::Classification,
        _ => Kind::Unknown,
    }
}

/// System kind of a batch.
pub fn classify_kind(trace: &Trace, batch: &str) -> Result<Kind, ModeError> {
    let loaded = load(trace, batch)?;
    Ok(kind_of(trace, &loaded))
}

struct PhaseFindings {
    phase: Phase,
    candidates: Vec<Phase>,
    k_sizes: Vec<usize>,
    upsilon: usize,
    m: usize,
}

fn phase_of(trace: &Trace, batch: &Batch<'_>, k: KInterval) -> PhaseFindings {
    let upsilon = batch.inputs.len();
    let m = match batch.shape {
        Shape::Tuples => trace.qualified_tuples().len(),
        _ => trace.members(SetName::Qualified).len(),
    };
    let mut found = PhaseFindings {
        phase: Phase::Unknown,
        candidates: Vec::new(),
        k_sizes: Vec::new(),
        upsilon,
        m,
    };
    if upsilon == 1 {
        found.phase = Phase::Normal;
        return found;
    }

    // Enrollment: every input mapped exactly once into a declared class,
    // one group per class covering all of C, group sizes within ⟨min, max⟩.
    let classes: Vec<&str> = trace
        .effective_classes()
        .into_iter()
        .map(|c| c.name.as_str())
        .collect();
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    let mut partition = !classes.is_empty();
    for outputs in batch.inputs.values() {
        match outputs.as_slice() {
            [Some(class)] if classes.contains(class) => *groups.entry(class).or_default() += 1,
            _ => partition = false,
        }
    }
    let enrollment = partition
        && groups.len() == classes.len()
        && groups.values().all(|&size| k.contains(size, upsilon));
    if enrollment {
        found.k_sizes = classes.iter().map(|c| groups[c]).collect();
    }

    let training = batch.shape != Shape::Mixed && upsilon == m;

    (found.phase, found.candidates) = match (enrollment, training) {
        (true, true) => (Phase::Ambiguous, vec![Phase::Enrollment, Phase::Training]),
        (true, false) => (Phase::Enrollment, vec![]),
        (false, true) => (Phase::Training, vec![]),
        (false, false) => (Phase::Unknown, vec![]),
    };
    found
}

/// Operating phase of a batch, with the interval used for enrollment
/// group sizes.
pub fn infer_phase(trace: &Trace, batch: &str, k: KInterval) -> Result<Phase, ModeError> {
    let loaded = load(trace, batch)?;
    Ok(phase_of(trace, &loaded, k).phase)
}

/// Full kind × phase report of one batch.
pub fn classify_mode(trace: &Trace, batch: &str, k: KInterval) -> Result<ModeReport, ModeError> {
    let loaded = load(trace, batch)?;
    let kind = kind_of(trace, &loaded);
    let phase = phase_of(trace, &loaded, k);
    let distinct_templates = loaded
        .inputs
        .keys()
        .map(|(t, _)| *t)
        .collect::<BTreeSet<_>>()
        .len();
    let notation = denotation(kind, phase.phase);
    Ok(ModeReport {
        batch: batch.to_string(),
        kind,
        phase: phase.phase,
        candidates: phase.candidates,
        upsilon: phase.upsilon,
        distinct_templates,
        omega: trace.members(SetName::Classes).len(),
        m: phase.m,
        n: trace.members(SetName::Classes).len(),
        n_prime: trace.members(SetName::Enrolled).len(),
        k_sizes: phase.k_sizes,
        c_equiv_be: trace.classes_match_enrolled(),
        ratio: notation.map(|(r, _)| r.to_string()),
        denotation: notation.map(|(_, d)| d.to_string()),
    })
}

impl fmt::Display for ModeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "batch:      {}", self.batch)?;
        writeln!(f, "kind:       {}", self.kind)?;
        write!(f, "phase:      {}", self.phase)?;
        if !self.candidates.is_empty() {
            let names: Vec<_> = self.candidates.iter().map(|p| p.as_str()).collect();
            write!(f, " ({})", names.join(" | "))?;
        }
        writeln!(f)?;
        if let Some(d) = &self.denotation {
            writeln!(f, "mapping:    {d}")?;
        }
        writeln!(f, "Υ : Ω       {} : {}", self.upsilon, self.omega)?;
        writeln!(
            f,
            "m={} n={} n′={} templates={} C≃B_e={}",
            self.m, self.n, self.n_prime, self.distinct_templates, self.c_equiv_be
        )?;
        if !self.k_sizes.is_empty() {
            let sizes: Vec<_> = self.k_sizes.iter().map(usize::to_string).collect();
            writeln!(f, "k per class: [{}]", sizes.join(", "))?;
        }
        Ok(())
    }
}
