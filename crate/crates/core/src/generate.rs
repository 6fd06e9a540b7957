//! Seeded synthetic traces.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, so the same config
//! yields the same trace on every platform.
//!
//! Shape of a mode-targeted trace:
//!
//! * `phenomena` phenomena `ph1..`, each owning `mu` structures `st1..`;
//! * `classes` classes `c1..`; for verification and identification `c_i`
//!   is bound to `ph_i` and `ph1..ph_classes` are enrolled, for
//!   classification classes are unbound and nobody is enrolled;
//! * `samples_per_phenomenon` acquisitions per phenomenon, each ending in
//!   one template `t_j`. With sampling-side arity an acquisition is one
//!   sample over all `mu` structures; with extraction-side arity it is
//!   `mu` single-source samples fused into one template;
//! * templates recognized in batch `main` always pass quality; among the
//!   remaining templates `round(failed_fraction · extras)` are failed or
//!   left untested;
//! * enrollment targets add one recognized template in batch `probe` so
//!   that `c(T_q)` (and `c(T_q⁺)`) exceed `Υ`.

use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mode::{KInterval, Kind, Phase};
use crate::model::{
    Arity, ClassDecl, Declaration, MappingEvent, PhenomenonDecl, Placement, QualityResult,
    StructureDecl, Trace,
};

/// Label of the batch a mode target is realized in.
pub const MAIN_BATCH: &str = "main";
/// Label of the auxiliary batch emitted for enrollment targets.
pub const PROBE_BATCH: &str = "probe";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mode(Kind, Phase),
    /// A valid trace with counts, arity and mode drawn from the seed.
    RandomValid,
}

impl Target {
    /// All nine definite (kind, phase) targets.
    pub fn all_modes() -> Vec<Target> {
        Kind::DEFINITE
            .into_iter()
            .flat_map(|k| Phase::DEFINITE.into_iter().map(move |p| Target::Mode(k, p)))
            .collect()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Mode(k, p) => write!(f, "{k}:{p}"),
            Target::RandomValid => f.write_str("random-valid"),
        }
    }
}

impl FromStr for Target {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random-valid" {
            return Ok(Target::RandomValid);
        }
        let bad = |reason: String| GenError::Infeasible {
            fields: vec!["target"],
            reason,
        };
        let (kind, phase) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("`{s}` is neither `kind:phase` nor `random-valid`")))?;
        Ok(Target::Mode(
            kind.parse().map_err(|e: crate::mode::ModeError| bad(e.to_string()))?,
            phase.parse().map_err(|e: crate::mode::ModeError| bad(e.to_string()))?,
        ))
    }
}

/// Enrollment group size: fixed, or drawn per class from `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSpec {
    Fixed(usize),
    Range(usize, usize),
}

impl KSpec {
    pub fn min(self) -> usize {
        match self {
            KSpec::Fixed(k) | KSpec::Range(k, _) => k,
        }
    }

    pub fn max(self) -> usize {
        match self {
            KSpec::Fixed(k) | KSpec::Range(_, k) => k,
        }
    }

    /// Interval to hand to the mode classifier for these group sizes.
    pub fn interval(self) -> KInterval {
        KInterval {
            min: self.min(),
            max: Some(self.max()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub target: Target,
    pub phenomena: usize,
    pub classes: usize,
    pub samples_per_phenomenon: usize,
    pub k: KSpec,
    pub mu: u32,
    pub placement: Placement,
    /// Narrower perspective (every phenomenon a person) when set.
    pub persons: bool,
    /// Share of non-recognized templates that do not pass quality.
    pub failed_fraction: f64,
}

impl GenConfig {
    pub fn new(target: Target, seed: u64) -> Self {
        GenConfig {
            seed,
            target,
            phenomena: 4,
            classes: 3,
            samples_per_phenomenon: 4,
            k: KSpec::Fixed(2),
            mu: 1,
            placement: Placement::Sampling,
            persons: true,
            failed_fraction: 0.5,
        }
    }

    /// Total acquisitions, i.e. `c(T)`.
    pub fn acquisitions(&self) -> usize {
        self.phenomena * self.samples_per_phenomenon
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("infeasible configuration ({}): {reason}", fields.join(", "))]
    Infeasible {
        fields: Vec<&'static str>,
        reason: String,
    },
}

fn infeasible(fields: &[&'static str], reason: impl Into<String>) -> GenError {
    GenError::Infeasible {
        fields: fields.to_vec(),
        reason: reason.into(),
    }
}

fn nonpassed_count(failed_fraction: f64, extras: usize) -> usize {
    ((failed_fraction * extras as f64).round() as usize).min(extras)
}

fn check_feasible(cfg: &GenConfig, kind: Kind, phase: Phase) -> Result<(), GenError> {
    for (field, value) in [
        ("phenomena", cfg.phenomena),
        ("classes", cfg.classes),
        ("samples_per_phenomenon", cfg.samples_per_phenomenon),
        ("k", cfg.k.min()),
    ] {
        if value == 0 {
            return Err(infeasible(&[field], "must be at least 1"));
        }
    }
    if cfg.mu == 0 {
        return Err(infeasible(&["mu"], "must be at least 1"));
    }
    if cfg.k.min() > cfg.k.max() {
        return Err(infeasible(&["k"], "range minimum exceeds its maximum"));
    }
    if !(0.0..=1.0).contains(&cfg.failed_fraction) {
        return Err(infeasible(&["failed_fraction"], "must lie in [0, 1]"));
    }
    if !Kind::DEFINITE.contains(&kind) || !Phase::DEFINITE.contains(&phase) {
        return Err(infeasible(&["target"], "only definite kinds and phases can be targeted"));
    }
    let bound = kind != Kind::Classification;
    if bound && cfg.classes > cfg.phenomena {
        return Err(infeasible(
            &["classes", "phenomena"],
            format!("{kind} binds every class to its own enrolled phenomenon"),
        ));
    }
    let total = cfg.acquisitions();
    match phase {
        Phase::Enrollment => {
            if cfg.classes * cfg.k.min() < 2 {
                return Err(infeasible(
                    &["classes", "k"],
                    "an enrollment batch needs at least two inputs",
                ));
            }
            if bound && cfg.samples_per_phenomenon < cfg.k.max() {
                return Err(infeasible(
                    &["samples_per_phenomenon", "k"],
                    "each enrolled phenomenon needs k templates of its own",
                ));
            }
            if total <= cfg.classes * cfg.k.max() {
                return Err(infeasible(
                    &["phenomena", "samples_per_phenomenon", "classes", "k"],
                    "enrollment needs one qualified template beyond the enrolled ones",
                ));
            }
        }
        Phase::Training if total - nonpassed_count(cfg.failed_fraction, total) < 2 => {
            return Err(infeasible(
                &["phenomena", "samples_per_phenomenon", "failed_fraction"],
                "a training batch needs at least two qualified templates",
            ));
        }
        _ => {}
    }
    Ok(())
}

/// Generates a trace for `cfg`. Mode targets are realized in batch
/// [`MAIN_BATCH`].
pub fn generate_trace(cfg: &GenConfig) -> Result<Trace, GenError> {
    match cfg.target {
        Target::Mode(kind, phase) => {
            check_feasible(cfg, kind, phase)?;
            Ok(build(cfg, kind, phase))
        }
        Target::RandomValid => Ok(random_valid(cfg.seed)),
    }
}

/// Draws a small feasible mode config from `seed` and builds it.
fn random_valid(seed: u64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let kind = *Kind::DEFINITE.choose(&mut rng).expect("non-empty");
        let phase = *Phase::DEFINITE.choose(&mut rng).expect("non-empty");
        let k_min = rng.random_range(1..=3);
        let cfg = GenConfig {
            seed: rng.random(),
            target: Target::Mode(kind, phase),
            phenomena: rng.random_range(1..=5),
            classes: rng.random_range(1..=4),
            samples_per_phenomenon: rng.random_range(1..=4),
            k: if rng.random_bool(0.5) {
                KSpec::Fixed(k_min)
            } else {
                KSpec::Range(k_min, k_min + rng.random_range(0..=2))
            },
            mu: rng.random_range(1..=3),
            placement: if rng.random_bool(0.5) {
                Placement::Sampling
            } else {
                Placement::Extraction
            },
            persons: rng.random_bool(0.5),
            failed_fraction: *[0.0, 0.25, 0.5, 1.0].choose(&mut rng).expect("non-empty"),
        };
        if check_feasible(&cfg, kind, phase).is_ok() {
            return build(&cfg, kind, phase);
        }
    }
}

struct Plan {
    /// Main-batch inputs: template index and enrollment group (class index).
    main: Vec<(usize, Option<usize>)>,
    probe: Option<usize>,
}

fn build(cfg: &GenConfig, kind: Kind, phase: Phase) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let arity = Arity::new(cfg.mu, cfg.placement).expect("mu checked");
    let mu = cfg.mu as usize;
    let spp = cfg.samples_per_phenomenon;
    let total = cfg.acquisitions();
    let bound = kind != Kind::Classification;
    // Templates are numbered from 0 here and named from 1.
    let owner = |j: usize| j / spp;

    let mut trace = Trace::new(arity);
    for s in 1..=cfg.phenomena * mu {
        trace
            .declarations
            .push(Declaration::Structure(StructureDecl { name: format!("st{s}") }));
    }
    for p in 0..cfg.phenomena {
        trace.declarations.push(Declaration::Phenomenon(PhenomenonDecl {
            name: format!("ph{}", p + 1),
            is_person: cfg.persons,
            is_enrolled: bound && p < cfg.classes,
            structures: (p * mu + 1..=(p + 1) * mu).map(|s| format!("st{s}")).collect(),
        }));
    }
    for c in 0..cfg.classes {
        trace.declarations.push(Declaration::Class(ClassDecl {
            name: format!("c{}", c + 1),
            bound: bound.then(|| format!("ph{}", c + 1)),
        }));
    }

    let plan = match phase {
        Phase::Normal => {
            let j = if bound {
                rng.random_range(0..cfg.classes) * spp + rng.random_range(0..spp)
            } else {
                rng.random_range(0..total)
            };
            Plan {
                main: vec![(j, None)],
                probe: None,
            }
        }
        Phase::Enrollment => {
            let sizes: Vec<usize> = (0..cfg.classes)
                .map(|_| rng.random_range(cfg.k.min()..=cfg.k.max()))
                .collect();
            let mut main = Vec::new();
            if bound {
                for (c, &size) in sizes.iter().enumerate() {
                    let mut own: Vec<usize> = (c * spp..(c + 1) * spp).collect();
                    own.shuffle(&mut rng);
                    main.extend(own.into_iter().take(size).map(|j| (j, Some(c))));
                }
            } else {
                let mut all: Vec<usize> = (0..total).collect();
                all.shuffle(&mut rng);
                let mut picked = all.into_iter();
                for (c, &size) in sizes.iter().enumerate() {
                    main.extend(picked.by_ref().take(size).map(|j| (j, Some(c))));
                }
            }
            main.sort_unstable();
            let rest: Vec<usize> = (0..total)
                .filter(|j| !main.iter().any(|(m, _)| m == j))
                .collect();
            let probe = *rest.choose(&mut rng).expect("feasibility guarantees a spare template");
            Plan {
                main,
                probe: Some(probe),
            }
        }
        Phase::Training | Phase::Ambiguous | Phase::Unknown => Plan {
            main: Vec::new(),
            probe: None,
        },
    };

    // Quality verdicts: recognized templates pass; extras pass, fail or stay untested.
    let mut status: Vec<Option<QualityResult>> = vec![Some(QualityResult::Passed); total];
    let mut extras: Vec<usize> = (0..total)
        .filter(|j| !plan.main.iter().any(|(m, _)| m == j) && plan.probe != Some(*j))
        .collect();
    extras.shuffle(&mut rng);
    for &j in extras.iter().take(nonpassed_count(cfg.failed_fraction, extras.len())) {
        status[j] = rng.random_bool(0.5).then_some(QualityResult::Failed);
    }
    let main = if phase == Phase::Training {
        (0..total)
            .filter(|&j| status[j] == Some(QualityResult::Passed))
            .map(|j| (j, None))
            .collect()
    } else {
        plan.main
    };

    let mut sample_no = 0;
    for (j, verdict) in status.iter().enumerate() {
        let structures: Vec<String> = (owner(j) * mu + 1..=(owner(j) + 1) * mu)
            .map(|s| format!("st{s}"))
            .collect();
        let source_groups = match cfg.placement {
            Placement::Sampling => vec![structures],
            Placement::Extraction => structures.into_iter().map(|s| vec![s]).collect(),
        };
        let mut inputs = Vec::new();
        for sources in source_groups {
            sample_no += 1;
            trace.events.push(MappingEvent::Sample {
                sample: format!("sm{sample_no}"),
                sources,
            });
            trace.events.push(MappingEvent::Preprocess {
                output: format!("sp{sample_no}"),
                input: format!("sm{sample_no}"),
            });
            inputs.push(format!("sp{sample_no}"));
        }
        let template = format!("t{}", j + 1);
        trace.events.push(MappingEvent::Extract {
            template: template.clone(),
            inputs,
        });
        if let Some(result) = *verdict {
            trace.events.push(MappingEvent::Quality { template, result });
        }
    }

    let claim = |j: usize| (kind == Kind::Verification).then(|| format!("ph{}", owner(j) + 1));
    let free_output = |j: usize, rng: &mut ChaCha8Rng| -> Option<String> {
        if !rng.random_bool(0.75) {
            return None;
        }
        if kind == Kind::Verification {
            (owner(j) < cfg.classes).then(|| format!("c{}", owner(j) + 1))
        } else {
            Some(format!("c{}", rng.random_range(0..cfg.classes) + 1))
        }
    };
    if let Some(j) = plan.probe {
        let output = free_output(j, &mut rng);
        trace.events.push(recognize(PROBE_BATCH, j, claim(j), output));
    }
    for (i, &(j, group)) in main.iter().enumerate() {
        let output = match group {
            Some(c) => Some(format!("c{}", c + 1)),
            // An unrecognized first input keeps a training batch from
            // also reading as an enrollment partition.
            None if phase == Phase::Training && i == 0 => None,
            None => free_output(j, &mut rng),
        };
        trace.events.push(recognize(MAIN_BATCH, j, claim(j), output));
    }
    trace
}

fn recognize(batch: &str, j: usize, claimed: Option<String>, output: Option<String>) -> MappingEvent {
    MappingEvent::Recognize {
        batch: batch.to_string(),
        template: format!("t{}", j + 1),
        claimed,
        output,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::validate_trace;
    use crate::format::serialize_trace;
    use crate::mode::classify_mode;
    use crate::model::SetName;
    use crate::ontology::check_conformance;

    #[test]
    fn every_mode_target_is_recovered_and_valid() {
        for target in Target::all_modes() {
            for seed in 0..20 {
                let cfg = GenConfig::new(target, seed);
                let trace = generate_trace(&cfg).unwrap();
                let report = validate_trace(&trace);
                assert!(!report.has_errors(), "{target} seed {seed}: {:?}", report.violations);
                assert!(report.violations.is_empty(), "{target} seed {seed}: {:?}", report.violations);
                assert!(!check_conformance(&trace).has_errors(), "{target} seed {seed}");
                let mode = classify_mode(&trace, MAIN_BATCH, cfg.k.interval()).unwrap();
                assert_eq!(Target::Mode(mode.kind, mode.phase), target, "seed {seed}");
            }
        }
    }

    #[test]
    fn classification_normal_with_five_classes() {
        let cfg = GenConfig {
            classes: 5,
            ..GenConfig::new(Target::Mode(Kind::Classification, Phase::Normal), 1)
        };
        let trace = generate_trace(&cfg).unwrap();
        let mode = classify_mode(&trace, MAIN_BATCH, KInterval::default()).unwrap();
        assert_eq!((mode.kind, mode.phase), (Kind::Classification, Phase::Normal));
        assert_eq!((mode.upsilon, mode.omega), (1, 5));
    }

    #[test]
    fn identification_enrollment_four_by_three() {
        let cfg = GenConfig {
            classes: 4,
            k: KSpec::Fixed(3),
            ..GenConfig::new(Target::Mode(Kind::Identification, Phase::Enrollment), 9)
        };
        let trace = generate_trace(&cfg).unwrap();
        let mode = classify_mode(&trace, MAIN_BATCH, cfg.k.interval()).unwrap();
        assert_eq!(mode.phase, Phase::Enrollment);
        assert_eq!(mode.upsilon, 12);
        assert_eq!(mode.k_sizes, vec![3, 3, 3, 3]);
    }

    #[test]
    fn same_seed_same_bytes() {
        for target in Target::all_modes().into_iter().chain([Target::RandomValid]) {
            let cfg = GenConfig::new(target, 77);
            assert_eq!(
                serialize_trace(&generate_trace(&cfg).unwrap()),
                serialize_trace(&generate_trace(&cfg).unwrap())
            );
        }
        let a = generate_trace(&GenConfig::new(Target::RandomValid, 1)).unwrap();
        let b = generate_trace(&GenConfig::new(Target::RandomValid, 2)).unwrap();
        assert_ne!(serialize_trace(&a), serialize_trace(&b));
    }

    #[test]
    fn multimodal_placements() {
        for placement in [Placement::Sampling, Placement::Extraction] {
            let cfg = GenConfig {
                mu: 3,
                placement,
                ..GenConfig::new(Target::Mode(Kind::Identification, Phase::Training), 4)
            };
            let trace = generate_trace(&cfg).unwrap();
            assert!(validate_trace(&trace).violations.is_empty());
            assert!(check_conformance(&trace).violations.is_empty());
            let per = if placement == Placement::Extraction { 3 } else { 1 };
            assert_eq!(trace.members(SetName::Samples).len(), 16 * per);
            assert_eq!(trace.members(SetName::Templates).len(), 16);
        }
    }

    #[test]
    fn quality_split_follows_failed_fraction() {
        let cfg = GenConfig {
            failed_fraction: 0.5,
            ..GenConfig::new(Target::Mode(Kind::Classification, Phase::Training), 3)
        };
        let trace = generate_trace(&cfg).unwrap();
        assert_eq!(trace.members(SetName::Templates).len(), 16);
        assert_eq!(trace.members(SetName::Qualified).len(), 8);
    }

    #[test]
    fn random_valid_traces_are_clean() {
        for seed in 0..200 {
            let trace = generate_trace(&GenConfig::new(Target::RandomValid, seed)).unwrap();
            assert!(validate_trace(&trace).violations.is_empty(), "seed {seed}");
            assert!(!check_conformance(&trace).has_errors(), "seed {seed}");
        }
    }

    #[test]
    fn infeasible_configs_name_their_fields() {
        let verification = Target::Mode(Kind::Verification, Phase::Normal);
        let err = generate_trace(&GenConfig {
            classes: 0,
            ..GenConfig::new(verification, 0)
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "infeasible configuration (classes): must be at least 1");

        let GenError::Infeasible { fields, .. } = generate_trace(&GenConfig {
            classes: 6,
            ..GenConfig::new(verification, 0)
        })
        .unwrap_err();
        assert_eq!(fields, vec!["classes", "phenomena"]);

        let GenError::Infeasible { fields, .. } = generate_trace(&GenConfig {
            k: KSpec::Fixed(5),
            ..GenConfig::new(Target::Mode(Kind::Identification, Phase::Enrollment), 0)
        })
        .unwrap_err();
        assert_eq!(fields, vec!["samples_per_phenomenon", "k"]);
    }

    #[test]
    fn target_parsing() {
        assert_eq!(
            "verification:enrollment".parse::<Target>().unwrap(),
            Target::Mode(Kind::Verification, Phase::Enrollment)
        );
        assert_eq!("random-valid".parse::<Target>().unwrap(), Target::RandomValid);
        assert!("verification".parse::<Target>().is_err());
        assert!("unknown:normal".parse::<Target>().is_err());
        assert!("identification:ambiguous".parse::<Target>().is_err());
        assert_eq!(Target::all_modes().len(), 9);
        for t in Target::all_modes() {
            assert_eq!(t.to_string().parse::<Target>().unwrap(), t);
        }
    }
}
