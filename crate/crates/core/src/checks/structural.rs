use std::collections::{HashMap, HashSet};

use super::{Code, Finding, Index, Mapping, Violation};
use crate::model::{Declaration, EntityId, EntityKind, UNRECOGNIZED};

pub(crate) fn check(index: &Index<'_>) -> Vec<Finding> {
    let trace = index.trace;
    let mut out = Vec::new();
    let mut seen: HashSet<EntityId> = HashSet::new();
    // bound phenomenon -> first effective class bound to it
    let mut binding_owner: HashMap<&str, &str> = HashMap::new();

    for (pos, decl) in trace.declarations.iter().enumerate() {
        let id = decl.id();
        let first = seen.insert(id.clone());
        if !first {
            out.push(Finding {
                anchor: pos,
                violation: Violation::new(
                    Code::StructDuplicateId,
                    Mapping::Structural,
                    id.clone(),
                    format!("{id} is declared more than once"),
                ),
            });
        }

        match decl {
            Declaration::Structure(_) => {}
            Declaration::Phenomenon(p) => {
                let missing: Vec<&str> = p
                    .structures
                    .iter()
                    .filter(|st| !Index::made_before(&index.structure_decl, st, pos))
                    .map(String::as_str)
                    .collect();
                if !missing.is_empty() {
                    out.push(Finding {
                        anchor: pos,
                        violation: Violation::new(
                            Code::StructDanglingRef,
                            Mapping::Structural,
                            id,
                            format!(
                                "lists structures not declared before it: {}",
                                missing.join(", ")
                            ),
                        ),
                    });
                }
            }
            Declaration::Class(c) => {
                if c.name == UNRECOGNIZED {
                    out.push(Finding {
                        anchor: pos,
                        violation: Violation::new(
                            Code::StructDuplicateId,
                            Mapping::Structural,
                            id.clone(),
                            "the unrecognized class ν is reserved and cannot be declared",
                        ),
                    });
                }
                let Some(bound) = c.bound.as_deref() else {
                    continue;
                };
                if !Index::made_before(&index.phenomenon_decl, bound, pos) {
                    out.push(Finding {
                        anchor: pos,
                        violation: Violation::new(
                            Code::StructDanglingRef,
                            Mapping::Structural,
                            id.clone(),
                            format!("bound to phenomenon `{bound}` which is not declared before it"),
                        ),
                    });
                }
                if first {
                    if let Some(other) = binding_owner.get(bound) {
                        out.push(Finding {
                            anchor: pos,
                            violation: Violation::new(
                                Code::StructDuplicateId,
                                Mapping::Structural,
                                id,
                                format!("phenomenon `{bound}` is already bound to class `{other}`"),
                            ),
                        });
                    } else {
                        binding_owner.insert(bound, c.name.as_str());
                    }
                }
            }
        }
    }

    for (name, &pos) in &index.structure_decl {
        if !index.owners.contains_key(name) {
            out.push(Finding {
                anchor: pos,
                violation: Violation::new(
                    Code::OrphanEntity,
                    Mapping::Structural,
                    EntityId::new(EntityKind::Structure, *name),
                    "structure is not part of any declared phenomenon",
                ),
            });
        }
    }
    out
}
