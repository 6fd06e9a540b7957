//! Shared strategies and helpers for the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use biotrace::model::{ClassDecl, PhenomenonDecl, StructureDecl};
use biotrace::{
    Arity, Declaration, MappingEvent, Placement, QualityResult, SetName, Trace,
};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

fn name(prefix: &'static str, pool: usize) -> impl Strategy<Value = String> {
    (1..=pool).prop_map(move |i| format!("{prefix}{i}"))
}

fn names(prefix: &'static str, pool: usize, max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(name(prefix, pool), 0..=max)
}

pub fn declaration() -> impl Strategy<Value = Declaration> {
    prop_oneof![
        name("st", 4).prop_map(|name| Declaration::Structure(StructureDecl { name })),
        (name("ph", 3), any::<bool>(), any::<bool>(), names("st", 4, 2)).prop_map(
            |(name, is_person, is_enrolled, structures)| {
                Declaration::Phenomenon(PhenomenonDecl {
                    name,
                    is_person,
                    is_enrolled,
                    structures,
                })
            }
        ),
        (name("c", 3), proptest::option::of(name("ph", 4)))
            .prop_map(|(name, bound)| Declaration::Class(ClassDecl { name, bound })),
    ]
}

pub fn event() -> impl Strategy<Value = MappingEvent> {
    prop_oneof![
        (name("sm", 5), names("st", 4, 2))
            .prop_map(|(sample, sources)| MappingEvent::Sample { sample, sources }),
        (name("sp", 5), name("sm", 5))
            .prop_map(|(output, input)| MappingEvent::Preprocess { output, input }),
        (name("t", 5), names("sp", 5, 2))
            .prop_map(|(template, inputs)| MappingEvent::Extract { template, inputs }),
        (name("t", 5), any::<bool>()).prop_map(|(template, passed)| MappingEvent::Quality {
            template,
            result: if passed {
                QualityResult::Passed
            } else {
                QualityResult::Failed
            },
        }),
        (
            name("b", 2),
            name("t", 5),
            proptest::option::of(name("ph", 4)),
            proptest::option::of(name("c", 4)),
        )
            .prop_map(|(batch, template, claimed, output)| MappingEvent::Recognize {
                batch,
                template,
                claimed,
                output,
            }),
    ]
}

/// Arbitrary traces over small name pools: at most 50 records, with
/// collisions, dangling references and repeated productions all likely.
pub fn arbitrary_trace() -> impl Strategy<Value = Trace> {
    (
        1u32..=2,
        any::<bool>(),
        proptest::collection::vec(declaration(), 0..=15),
        proptest::collection::vec(event(), 0..=35),
    )
        .prop_map(|(mu, extraction, declarations, events)| Trace {
            arity: Arity::new(
                mu,
                if extraction {
                    Placement::Extraction
                } else {
                    Placement::Sampling
                },
            )
            .unwrap(),
            declarations,
            events,
        })
}

/// Deterministic samples from a strategy, for the acceptance tallies.
pub fn sample_values<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

/// Declared plus produced distinct entities.
pub fn entity_count(trace: &Trace) -> usize {
    let mut ids = BTreeSet::new();
    for d in &trace.declarations {
        ids.insert(d.id());
    }
    for e in &trace.events {
        if !matches!(e, MappingEvent::Quality { .. } | MappingEvent::Recognize { .. }) {
            ids.insert(e.subject());
        }
    }
    ids.len()
}

/// Applies `f` to every name, batch label included.
pub fn rename(trace: &Trace, f: impl Fn(&str) -> String) -> Trace {
    let all = |v: &[String]| v.iter().map(|s| f(s)).collect::<Vec<_>>();
    Trace {
        arity: trace.arity,
        declarations: trace
            .declarations
            .iter()
            .map(|d| match d {
                Declaration::Structure(s) => Declaration::Structure(StructureDecl { name: f(&s.name) }),
                Declaration::Phenomenon(p) => Declaration::Phenomenon(PhenomenonDecl {
                    name: f(&p.name),
                    is_person: p.is_person,
                    is_enrolled: p.is_enrolled,
                    structures: all(&p.structures),
                }),
                Declaration::Class(c) => Declaration::Class(ClassDecl {
                    name: f(&c.name),
                    bound: c.bound.as_deref().map(&f),
                }),
            })
            .collect(),
        events: trace
            .events
            .iter()
            .map(|e| match e {
                MappingEvent::Sample { sample, sources } => MappingEvent::Sample {
                    sample: f(sample),
                    sources: all(sources),
                },
                MappingEvent::Preprocess { output, input } => MappingEvent::Preprocess {
                    output: f(output),
                    input: f(input),
                },
                MappingEvent::Extract { template, inputs } => MappingEvent::Extract {
                    template: f(template),
                    inputs: all(inputs),
                },
                MappingEvent::Quality { template, result } => MappingEvent::Quality {
                    template: f(template),
                    result: *result,
                },
                MappingEvent::Recognize {
                    batch,
                    template,
                    claimed,
                    output,
                } => MappingEvent::Recognize {
                    batch: f(batch),
                    template: f(template),
                    claimed: claimed.as_deref().map(&f),
                    output: output.as_deref().map(&f),
                },
            })
            .collect(),
    }
}

/// Removes every class binding.
pub fn erase_bindings(trace: &Trace) -> Trace {
    let mut out = trace.clone();
    for d in &mut out.declarations {
        if let Declaration::Class(c) = d {
            c.bound = None;
        }
    }
    out
}

/// Removes every claimed identity from recognize events.
pub fn strip_claims(trace: &Trace) -> Trace {
    let mut out = trace.clone();
    for e in &mut out.events {
        if let MappingEvent::Recognize { claimed, .. } = e {
            *claimed = None;
        }
    }
    out
}

/// Clears every person flag.
pub fn broaden(trace: &Trace) -> Trace {
    let mut out = trace.clone();
    for d in &mut out.declarations {
        if let Declaration::Phenomenon(p) = d {
            p.is_person = false;
        }
    }
    out
}

/// Whether template `t` reaches some declared phenomenon through
/// extract → preprocess → sample → structure edges.
pub fn has_provenance(trace: &Trace, t: &str) -> bool {
    let owners: BTreeSet<&str> = trace
        .phenomena()
        .flat_map(|p| p.structures.iter().map(String::as_str))
        .collect();
    trace.events.iter().any(|e| match e {
        MappingEvent::Extract { template, inputs } if template == t => inputs.iter().any(|sp| {
            trace.events.iter().any(|e| match e {
                MappingEvent::Preprocess { output, input } if output == sp => {
                    trace.events.iter().any(|e| match e {
                        MappingEvent::Sample { sample, sources } if sample == input => {
                            sources.iter().any(|s| owners.contains(s.as_str()))
                        }
                        _ => false,
                    })
                }
                _ => false,
            })
        }),
        _ => false,
    })
}

pub fn set_members(trace: &Trace, set: SetName) -> BTreeSet<String> {
    trace.members(set).into_iter().map(str::to_string).collect()
}
