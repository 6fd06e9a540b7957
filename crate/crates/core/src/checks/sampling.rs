use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::MappingEvent;

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let expected = index.trace.arity.sample_sources();
    let mut out = Vec::new();
    for (idx, event) in index.trace.events.iter().enumerate() {
        let MappingEvent::Sample { sources, .. } = event else {
            continue;
        };
        let anchor = index.event_anchor(idx);
        if sources.len() != expected {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::SBadArity,
                    Mapping::S,
                    event.subject(),
                    format!("taken from {} structures, expected {expected}", sources.len()),
                ),
            });
        }
        // A source resolves only if it is a declared structure of some phenomenon.
        let unresolved: Vec<&str> = sources
            .iter()
            .filter(|st| {
                !index.structure_decl.contains_key(st.as_str())
                    || !index.owners.contains_key(st.as_str())
            })
            .map(String::as_str)
            .collect();
        if !unresolved.is_empty() {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::StructDanglingRef,
                    Mapping::S,
                    event.subject(),
                    format!(
                        "sources do not resolve to structures of declared phenomena: {}",
                        unresolved.join(", ")
                    ),
                ),
            });
        }
    }
    out
}
