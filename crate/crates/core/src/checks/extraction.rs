use std::collections::HashMap;

use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::{EntityId, EntityKind, MappingEvent};

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let expected = index.trace.arity.extract_inputs();
    let mut out = Vec::new();
    // in-degree of every preprocessed sample over all extract inputs
    let mut uses: HashMap<&str, usize> = HashMap::new();
    for (idx, event) in index.trace.events.iter().enumerate() {
        let MappingEvent::Extract { inputs, .. } = event else {
            continue;
        };
        let anchor = index.event_anchor(idx);
        for input in inputs {
            *uses.entry(input.as_str()).or_default() += 1;
        }
        if inputs.len() != expected {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::FBadArity,
                    Mapping::F,
                    event.subject(),
                    format!(
                        "extracted from {} preprocessed samples, expected {expected}",
                        inputs.len()
                    ),
                ),
            });
        }
        let missing: Vec<&str> = inputs
            .iter()
            .filter(|sp| !Index::made_before(&index.preprocessed_made, sp, idx))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::StructDanglingRef,
                    Mapping::F,
                    event.subject(),
                    format!(
                        "inputs not produced before this event: {}",
                        missing.join(", ")
                    ),
                ),
            });
        }
    }

    for (&sp, &made) in &index.preprocessed_made {
        let subject = EntityId::new(EntityKind::Preprocessed, sp);
        let violation = match uses.get(sp).copied().unwrap_or(0) {
            0 => Violation::new(
                Code::FNotTotal,
                Mapping::F,
                subject,
                "preprocessed sample never feeds an extraction",
            ),
            1 => continue,
            n => Violation::new(
                Code::FNotFunction,
                Mapping::F,
                subject,
                format!("preprocessed sample feeds {n} extractions"),
            ),
        };
        out.push(Finding {
            anchor: index.event_anchor(made),
            violation,
        });
    }
    out
}
