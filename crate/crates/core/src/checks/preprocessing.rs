use std::collections::HashMap;

use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::{EntityId, EntityKind, MappingEvent};

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut uses: HashMap<&str, usize> = HashMap::new();
    for (idx, event) in index.trace.events.iter().enumerate() {
        let MappingEvent::Preprocess { input, .. } = event else {
            continue;
        };
        *uses.entry(input.as_str()).or_default() += 1;
        if !Index::made_before(&index.sample_made, input, idx) {
            out.push(Finding {
                anchor: index.event_anchor(idx),
                violation: Violation::new(
                    Code::StructDanglingRef,
                    Mapping::P,
                    event.subject(),
                    format!("input sample `{input}` is not produced before this event"),
                ),
            });
        }
    }

    for (&sample, &made) in &index.sample_made {
        let subject = EntityId::new(EntityKind::Sample, sample);
        let violation = match uses.get(sample).copied().unwrap_or(0) {
            0 => Violation::new(
                Code::PNotTotal,
                Mapping::P,
                subject,
                "sample is never preprocessed",
            ),
            1 => continue,
            n => Violation::new(
                Code::PNotFunction,
                Mapping::P,
                subject,
                format!("sample is preprocessed {n} times"),
            ),
        };
        out.push(Finding {
            anchor: index.event_anchor(made),
            violation,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::check_preprocessing;
    use super::super::fixtures::*;
    use crate::checks::Code;

    #[test]
    fn each_sample_preprocessed_once() {
        let mut trace = minimal_chain();
        trace.events.push(sample("sm2", &["st1"]));
        trace.events.push(preprocess("sp2", "sm2"));
        assert!(check_preprocessing(&trace).is_empty());
    }

    #[test]
    fn sample_never_preprocessed() {
        let mut trace = minimal_chain();
        trace.events.push(sample("sm2", &["st1"]));
        assert_eq!(
            codes(&check_preprocessing(&trace)),
            vec![(Code::PNotTotal, "sm2".into())]
        );
    }

    #[test]
    fn sample_preprocessed_twice() {
        let mut trace = minimal_chain();
        trace.events.push(preprocess("sp2", "sm1"));
        assert_eq!(
            codes(&check_preprocessing(&trace)),
            vec![(Code::PNotFunction, "sm1".into())]
        );
    }

    #[test]
    fn non_injective_preprocessing_is_accepted() {
        let mut trace = minimal_chain();
        trace.events.push(sample("sm2", &["st1"]));
        trace.events.push(preprocess("sp1", "sm2"));
        assert!(check_preprocessing(&trace).is_empty());
    }

    #[test]
    fn input_produced_later_dangles() {
        let mut trace = minimal_chain();
        trace.events.insert(0, preprocess("sp0", "sm2"));
        trace.events.push(sample("sm2", &["st1"]));
        assert_eq!(
            codes(&check_preprocessing(&trace)),
            vec![(Code::StructDanglingRef, "sp0".into())]
        );
    }
}
