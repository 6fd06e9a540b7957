//! Traces of biometric recognition pipelines: the data model, property
//! checkers for each pipeline mapping, batch mode inference, instance
//! conformance, the `.biotrace` file format and a seeded trace generator.
//!
//! ```
//! use biotrace::{classify_mode, generate_trace, validate_trace, GenConfig, KInterval, Kind, Phase, Target};
//!
//! let cfg = GenConfig::new(Target::Mode(Kind::Identification, Phase::Normal), 7);
//! let trace = generate_trace(&cfg).unwrap();
//! assert!(validate_trace(&trace).is_clean());
//! let report = classify_mode(&trace, "main", KInterval::default()).unwrap();
//! assert_eq!((report.kind, report.phase), (Kind::Identification, Phase::Normal));
//! ```

pub mod checks;
pub mod format;
pub mod generate;
pub mod mode;
pub mod model;
pub mod mutate;
pub mod ontology;

pub use checks::{
    brute_force_validate, check_extraction, check_preprocessing, check_quality,
    check_recognition, check_sampling, check_structure, validate_trace, Code, Mapping, Severity,
    ValidationReport, Violation,
};
pub use format::{parse_trace, serialize_trace, ParseCode, ParseError};
pub use generate::{generate_trace, GenConfig, GenError, KSpec, Target, MAIN_BATCH, PROBE_BATCH};
pub use mode::{classify_kind, classify_mode, denotation, infer_phase, KInterval, Kind, ModeReport, Phase};
pub use model::{
    all_cardinalities, cardinality, set_of, Arity, Declaration, EntityId, EntityKind,
    MappingEvent, Placement, QualityResult, SetName, Trace, UNRECOGNIZED,
};
pub use mutate::{mutate_trace, MutateError, Mutation};
pub use ontology::{check_conformance, derive_status, perspective, ConformanceReport, Perspective, StatusValue};
