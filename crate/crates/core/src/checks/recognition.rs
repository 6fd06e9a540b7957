use std::collections::HashMap;

use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::MappingEvent;

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let trace = index.trace;
    let mut out = Vec::new();

    // phenomenon -> classes bound to it (effective declarations only)
    let mut bound: HashMap<&str, Vec<&str>> = HashMap::new();
    for class in trace.effective_classes() {
        if let Some(p) = class.bound.as_deref() {
            bound.entry(p).or_default().push(class.name.as_str());
        }
    }

    // (batch, template, claimed) -> applications so far
    let mut applications: HashMap<(&str, &str, Option<&str>), usize> = HashMap::new();

    for (idx, event) in trace.events.iter().enumerate() {
        let MappingEvent::Recognize {
            batch,
            template,
            claimed,
            output,
        } = event
        else {
            continue;
        };
        let anchor = index.event_anchor(idx);
        let mut push = |code, message: String| {
            out.push(Finding {
                anchor,
                violation: Violation::new(code, Mapping::R, event.subject(), message),
            })
        };

        if !Index::made_before(&index.template_made, template, idx) {
            push(
                Code::StructDanglingRef,
                format!("template `{template}` is not extracted before recognition"),
            );
        } else if !index.qualified.contains(template.as_str()) {
            push(
                Code::RInputNotQualified,
                format!("template `{template}` did not pass quality control"),
            );
        }

        if let Some(class) = output.as_deref() {
            if !index.class_decl.contains_key(class) {
                push(
                    Code::StructDanglingRef,
                    format!("output class `{class}` is not declared"),
                );
            }
        }

        if let Some(claimed) = claimed.as_deref() {
            if !index.phenomenon_decl.contains_key(claimed) {
                push(
                    Code::RClaimedUnknown,
                    format!("claimed identity `{claimed}` is not a declared phenomenon"),
                );
            } else if let Some(class) = output.as_deref() {
                let allowed = bound.get(claimed).map(Vec::as_slice).unwrap_or_default();
                if !allowed.contains(&class) {
                    push(
                        Code::RVerifyClassMismatch,
                        format!(
                            "claim `{claimed}` recognized as `{class}`, expected {} or ν",
                            if allowed.is_empty() {
                                "no class".to_string()
                            } else {
                                allowed.join(" or ")
                            }
                        ),
                    );
                }
            }
        }

        let count = applications
            .entry((batch.as_str(), template.as_str(), claimed.as_deref()))
            .or_default();
        *count += 1;
        if *count == 2 {
            push(
                Code::RNotPartial,
                format!("input recognized more than once in batch `{batch}`"),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::check_recognition;
    use super::super::fixtures::*;
    use crate::checks::Code;

    #[test]
    fn recognized_once() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b1", "t1", None, Some("c1")));
        assert!(check_recognition(&trace).is_empty());
    }

    #[test]
    fn unrecognized_output_is_legal() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b1", "t1", None, None));
        trace.events.push(recognize("b2", "t1", Some("ph1"), None));
        assert!(check_recognition(&trace).is_empty());
    }

    #[test]
    fn failed_template_cannot_be_recognized() {
        let mut trace = minimal_chain();
        trace.events[3] = quality("t1", false);
        trace.events.push(recognize("b1", "t1", None, Some("c1")));
        assert_eq!(
            codes(&check_recognition(&trace)),
            vec![(Code::RInputNotQualified, "t1".into())]
        );
    }

    #[test]
    fn verification_class_mismatch() {
        let mut trace = minimal_chain();
        trace.declarations.push(class("c2", None));
        trace.events.push(recognize("b1", "t1", Some("ph1"), Some("c2")));
        assert_eq!(
            codes(&check_recognition(&trace)),
            vec![(Code::RVerifyClassMismatch, "t1".into())]
        );
    }

    #[test]
    fn unknown_claim() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b1", "t1", Some("ph7"), Some("c1")));
        assert_eq!(
            codes(&check_recognition(&trace)),
            vec![(Code::RClaimedUnknown, "t1".into())]
        );
    }

    #[test]
    fn twice_in_one_batch_but_fine_across_batches() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b1", "t1", None, Some("c1")));
        trace.events.push(recognize("b2", "t1", None, Some("c1")));
        assert!(check_recognition(&trace).is_empty());
        trace.events.push(recognize("b1", "t1", None, None));
        assert_eq!(
            codes(&check_recognition(&trace)),
            vec![(Code::RNotPartial, "t1".into())]
        );
    }

    #[test]
    fn distinct_claims_on_one_template_are_distinct_tuples() {
        let mut trace = minimal_chain();
        trace.declarations.push(phenomenon("ph2", false, &[]));
        trace.events.push(recognize("b1", "t1", Some("ph1"), Some("c1")));
        trace.events.push(recognize("b1", "t1", Some("ph2"), None));
        assert!(check_recognition(&trace).is_empty());
    }

    #[test]
    fn non_injective_recognition_is_accepted() {
        let mut trace = minimal_chain();
        trace.events.push(sample("sm2", &["st1"]));
        trace.events.push(preprocess("sp2", "sm2"));
        trace.events.push(extract("t2", &["sp2"]));
        trace.events.push(quality("t2", true));
        trace.events.push(recognize("b1", "t1", None, Some("c1")));
        trace.events.push(recognize("b1", "t2", None, Some("c1")));
        assert!(check_recognition(&trace).is_empty());
    }

    #[test]
    fn undeclared_output_class_dangles() {
        let mut trace = minimal_chain();
        trace.events.push(recognize("b1", "t1", None, Some("c9")));
        assert_eq!(
            codes(&check_recognition(&trace)),
            vec![(Code::StructDanglingRef, "t1".into())]
        );
    }
}
