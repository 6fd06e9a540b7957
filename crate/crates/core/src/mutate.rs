//! Named single-edit mutations that turn a valid trace into one that
//! violates a known property. Each mutation picks its edit site with a
//! ChaCha8 stream seeded from `seed`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::checks::Code;
use crate::model::{Declaration, MappingEvent, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    DropPreprocess,
    DuplicateQuality,
    DoubleRecognize,
    DangleStructure,
    CrossClaim,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropPreprocess,
        Mutation::DuplicateQuality,
        Mutation::DoubleRecognize,
        Mutation::DangleStructure,
        Mutation::CrossClaim,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::DropPreprocess => "drop-preprocess",
            Mutation::DuplicateQuality => "duplicate-quality",
            Mutation::DoubleRecognize => "double-recognize",
            Mutation::DangleStructure => "dangle-structure",
            Mutation::CrossClaim => "cross-claim",
        }
    }

    /// The violation the mutated trace is guaranteed to contain.
    pub fn expected_code(self) -> Code {
        match self {
            Mutation::DropPreprocess => Code::PNotTotal,
            Mutation::DuplicateQuality => Code::QNotPartialFunction,
            Mutation::DoubleRecognize => Code::RNotPartial,
            Mutation::DangleStructure => Code::StructDanglingRef,
            Mutation::CrossClaim => Code::RVerifyClassMismatch,
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mutation {
    type Err = MutateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MutateError::UnknownMutation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutateError {
    #[error("unknown mutation `{0}` (expected one of drop-preprocess, duplicate-quality, double-recognize, dangle-structure, cross-claim)")]
    UnknownMutation(String),
    #[error("{mutation} is not applicable: {reason}")]
    Inapplicable { mutation: Mutation, reason: String },
}

fn positions(trace: &Trace, pick: impl Fn(&MappingEvent) -> bool) -> Vec<usize> {
    (0..trace.events.len())
        .filter(|&i| pick(&trace.events[i]))
        .collect()
}

/// Applies `mutation` to a copy of `trace`.
pub fn mutate_trace(trace: &Trace, mutation: Mutation, seed: u64) -> Result<Trace, MutateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inapplicable = |reason: &str| MutateError::Inapplicable {
        mutation,
        reason: reason.to_string(),
    };
    let mut out = trace.clone();
    match mutation {
        Mutation::DropPreprocess => {
            let sites = positions(trace, |e| matches!(e, MappingEvent::Preprocess { .. }));
            let &i = sites
                .choose(&mut rng)
                .ok_or_else(|| inapplicable("the trace has no preprocess events"))?;
            out.events.remove(i);
        }
        Mutation::DuplicateQuality => {
            let sites = positions(trace, |e| matches!(e, MappingEvent::Quality { .. }));
            let &i = sites
                .choose(&mut rng)
                .ok_or_else(|| inapplicable("the trace has no quality events"))?;
            out.events.insert(i + 1, trace.events[i].clone());
        }
        Mutation::DoubleRecognize => {
            let sites = positions(trace, |e| matches!(e, MappingEvent::Recognize { .. }));
            let &i = sites
                .choose(&mut rng)
                .ok_or_else(|| inapplicable("the trace has no recognize events"))?;
            out.events.insert(i + 1, trace.events[i].clone());
        }
        Mutation::DangleStructure => {
            let sites = positions(
                trace,
                |e| matches!(e, MappingEvent::Sample { sources, .. } if !sources.is_empty()),
            );
            let &i = sites
                .choose(&mut rng)
                .ok_or_else(|| inapplicable("the trace has no sample with a source"))?;
            let fresh = fresh_structure_name(trace);
            if let MappingEvent::Sample { sources, .. } = &mut out.events[i] {
                let slot = rand::Rng::random_range(&mut rng, 0..sources.len());
                sources[slot] = fresh;
            }
        }
        Mutation::CrossClaim => {
            let sites = positions(trace, |e| matches!(e, MappingEvent::Recognize { .. }));
            let &i = sites
                .choose(&mut rng)
                .ok_or_else(|| inapplicable("the trace has no recognize events"))?;
            let phenomena: Vec<&str> = trace
                .effective_phenomena()
                .into_iter()
                .map(|p| p.name.as_str())
                .collect();
            let classes: Vec<&str> = trace
                .effective_classes()
                .into_iter()
                .map(|c| c.name.as_str())
                .collect();
            let mismatched = |p: &str| -> Vec<&str> {
                let bound = trace.classes_bound_to(p);
                classes.iter().copied().filter(|c| !bound.contains(c)).collect()
            };
            let MappingEvent::Recognize { claimed, output, .. } = &mut out.events[i] else {
                unreachable!("site is a recognize event");
            };
            // Keep the existing claim when it can be contradicted.
            let keep = claimed
                .as_deref()
                .filter(|p| phenomena.contains(p) && !mismatched(p).is_empty())
                .map(str::to_string);
            let pairs: Vec<(String, String)> = match keep {
                Some(p) => mismatched(&p)
                    .into_iter()
                    .map(|c| (p.clone(), c.to_string()))
                    .collect(),
                None => phenomena
                    .iter()
                    .flat_map(|p| mismatched(p).into_iter().map(|c| (p.to_string(), c.to_string())))
                    .collect(),
            };
            let (p, c) = pairs
                .choose(&mut rng)
                .cloned()
                .ok_or_else(|| inapplicable("every class is bound to every declared phenomenon"))?;
            *claimed = Some(p);
            *output = Some(c);
        }
    }
    Ok(out)
}

fn fresh_structure_name(trace: &Trace) -> String {
    let used: HashSet<&str> = trace
        .declarations
        .iter()
        .filter_map(|d| match d {
            Declaration::Structure(s) => Some(s.name.as_str()),
            Declaration::Phenomenon(p) => Some(p.name.as_str()),
            Declaration::Class(_) => None,
        })
        .chain(trace.events.iter().flat_map(|e| match e {
            MappingEvent::Sample { sources, .. } => sources.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }))
        .collect();
    (1..)
        .map(|n| format!("st_missing{n}"))
        .find(|name| !used.contains(name.as_str()))
        .expect("unbounded search")
}
