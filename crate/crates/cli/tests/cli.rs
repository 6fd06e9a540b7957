use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn biotrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biotrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["generate", "-o", &path];
    all.extend_from_slice(args);
    let out = biotrace(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generated_trace_validates_and_classifies() {
    let dir = TempDir::new().unwrap();
    let file = generate(
        dir.path(),
        "cn.biotrace",
        &["--target", "classification:normal", "--seed", "1", "--classes", "5"],
    );
    let out = biotrace(&["validate", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 error(s)"));

    let out = biotrace(&["classify", &file, "--batch", "main", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["kind"], "classification");
    assert_eq!(report["phase"], "normal");
    assert_eq!(report["upsilon"], 1);
    assert_eq!(report["omega"], 5);
    assert_eq!(report["denotation"], "1 : n, c(C) = n");
}

#[test]
fn generation_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["--target", "verification:training", "--seed", "42"];
    let a = generate(dir.path(), "a.biotrace", &args);
    let b = generate(dir.path(), "b.biotrace", &args);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    let to_stdout = biotrace(&["generate", "--target", "verification:training", "--seed", "42"]);
    assert_eq!(to_stdout.stdout, fs::read(dir.path().join("a.biotrace")).unwrap());
}

#[test]
fn mutation_makes_validation_fail_with_machine_lines() {
    let dir = TempDir::new().unwrap();
    let file = generate(
        dir.path(),
        "in.biotrace",
        &["--target", "identification:training", "--seed", "3"],
    );
    let mutated = dir.path().join("out.biotrace");
    let out = biotrace(&[
        "mutate",
        &file,
        "--mutation",
        "duplicate-quality",
        "--seed",
        "9",
        "-o",
        mutated.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = biotrace(&["validate", mutated.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("Q_NOT_PARTIAL_FUNCTION"))
        .expect("duplicate verdict reported");
    let fields: Vec<&str> = line.split('\t').collect();
    assert_eq!(fields.len(), 3);
    assert!(fields[1].starts_with("template:t"));
}

#[test]
fn parse_failures_exit_two_with_line_number() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.biotrace");
    fs::write(
        &path,
        "{\"format_version\":\"1\",\"mu\":1,\"mu_placement\":\"sampling\"}\n\
         {\"ev\":\"preprocess\",\"id\":\"sp1\",\"input\":\"sm9\"}\n\
         {\"ev\":\"sample\",\"id\":\"sm9\",\"sources\":[]}\n",
    )
    .unwrap();
    let out = biotrace(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("PARSE_FORWARD_REF at line 2, field `input`"), "{err}");
}

#[test]
fn usage_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let out = biotrace(&["generate", "--target", "verification:normal", "--seed", "1", "--classes", "9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classes, phenomena"));

    let out = biotrace(&["generate", "--target", "sideways:normal", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let file = generate(dir.path(), "v.biotrace", &["--target", "verification:normal", "--seed", "1"]);
    let out = biotrace(&["classify", &file, "--batch", "nope"]);
    assert_eq!(out.status.code(), Some(3));
    let out = biotrace(&["mutate", &file, "--mutation", "flip", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let missing = dir.path().join("missing.biotrace");
    let out = biotrace(&["validate", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn explain_known_and_unknown_codes() {
    let out = biotrace(&["explain", "P_NOT_TOTAL"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("P_NOT_TOTAL (error)\n"));
    let out = biotrace(&["explain", "ORPHAN_ENTITY"]);
    assert!(stdout(&out).starts_with("ORPHAN_ENTITY (warning)\n"));
    let out = biotrace(&["explain", "P_NOT_SURJECTIVE"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn enrollment_k_flags_reach_the_classifier() {
    let dir = TempDir::new().unwrap();
    let file = generate(
        dir.path(),
        "ie.biotrace",
        &["--target", "identification:enrollment", "--seed", "2", "--classes", "4", "--k", "3"],
    );
    let out = biotrace(&["classify", &file, "--batch", "main", "--k-min", "3", "--k-max", "3"]);
    let text = stdout(&out);
    assert!(text.contains("phase:      enrollment"), "{text}");
    assert!(text.contains("k per class: [3, 3, 3, 3]"));
    // Groups of three fall outside ⟨1, 2⟩.
    let out = biotrace(&["classify", &file, "--batch", "main", "--k-max", "2"]);
    assert!(stdout(&out).contains("phase:      unknown"));
}
