use std::collections::HashMap;

use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::MappingEvent;

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut verdicts: HashMap<&str, usize> = HashMap::new();
    for (idx, event) in index.trace.events.iter().enumerate() {
        let MappingEvent::Quality { template, .. } = event else {
            continue;
        };
        let anchor = index.event_anchor(idx);
        if !Index::made_before(&index.template_made, template, idx) {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::StructDanglingRef,
                    Mapping::Q,
                    event.subject(),
                    "template is not extracted before its quality check",
                ),
            });
        }
        let seen = verdicts.entry(template.as_str()).or_default();
        *seen += 1;
        if *seen == 2 {
            out.push(Finding {
                anchor,
                violation: Violation::new(
                    Code::QNotPartialFunction,
                    Mapping::Q,
                    event.subject(),
                    "template has more than one quality verdict",
                ),
            });
        }
    }
    out
}
