//! `biotrace` — validate, classify, generate and mutate `.biotrace` files.
//!
//! Exit codes:
//!
//! - 0: success, no error-severity violations
//! - 1: the trace has error-severity violations
//! - 2: the input file (or the command line) could not be parsed
//! - 3: usage error: infeasible generator config, inapplicable mutation,
//!   unknown batch or violation code
//! - 4: I/O error

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use biotrace::{
    check_conformance, classify_mode, generate_trace, mutate_trace, parse_trace,
    serialize_trace, validate_trace, Code, GenConfig, KInterval, KSpec, Mutation, Placement,
    Target, Trace,
};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "biotrace", version, about = "Check traces of biometric recognition pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    /// One violation per line: code<TAB>kind:name<TAB>message
    Machine,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check every mapping property and the class-model conformance.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Infer system kind and operating phase of one recognition batch.
    Classify {
        file: PathBuf,
        #[arg(long)]
        batch: String,
        /// Smallest accepted enrollment group size.
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        /// Largest accepted enrollment group size (default: Υ).
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: ModeFormat,
    },
    /// Write a seeded synthetic trace.
    Generate {
        /// `<kind>:<phase>` or `random-valid`.
        #[arg(long)]
        target: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        phenomena: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 4)]
        samples_per_phenomenon: usize,
        /// Fixed enrollment group size.
        #[arg(long, conflicts_with_all = ["k_min", "k_max"])]
        k: Option<usize>,
        /// Draw each group size from k-min..=k-max instead.
        #[arg(long, requires = "k_max")]
        k_min: Option<usize>,
        #[arg(long, requires = "k_min")]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 1)]
        mu: u32,
        #[arg(long, default_value = "sampling")]
        mu_placement: String,
        /// Broader perspective: phenomena are not persons.
        #[arg(long)]
        broader: bool,
        #[arg(long, default_value_t = 0.5)]
        failed_fraction: f64,
        /// Output file; standard output when omitted or `-`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a named mutation to a trace.
    Mutate {
        file: PathBuf,
        #[arg(long)]
        mutation: String,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Describe the property behind a violation code.
    Explain { code: String },
}

/// Failure that ends the run with a specific exit code.
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Exit {
            code,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(err: anyhow::Error) -> Self {
        Exit::new(EXIT_IO, format!("{err:#}"))
    }
}

fn read_trace(path: &Path) -> Result<Trace, Exit> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_trace(&text).map_err(|e| Exit::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) if path != Path::new("-") => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        _ => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn validate(file: &Path, format: ReportFormat) -> Result<u8, Exit> {
    let trace = read_trace(file)?;
    let mut report = validate_trace(&trace);
    let conformance = check_conformance(&trace);
    report.violations.extend(conformance.violations);
    let errors = report.errors().count();
    let warnings = report.violations.len() - errors;

    let mut out = String::new();
    match format {
        ReportFormat::Machine => {
            for v in &report.violations {
                out.push_str(&v.machine_line());
                out.push('\n');
            }
        }
        ReportFormat::Json => {
            let value = serde_json::json!({
                "violations": report.violations,
                "checked_counts": report.checked_counts,
                "perspective": conformance.perspective,
            });
            out = serde_json::to_string_pretty(&value).expect("report serializes");
            out.push('\n');
        }
        ReportFormat::Text => {
            for v in &report.violations {
                out.push_str(&format!("{v}\n"));
            }
            let counts: Vec<String> = report
                .checked_counts
                .iter()
                .map(|(set, n)| format!("{set}={n}"))
                .collect();
            out.push_str(&format!(
                "{}: {errors} error(s), {warnings} warning(s); {}; perspective {}\n",
                file.display(),
                counts.join(" "),
                conformance.perspective
            ));
        }
    }
    write_out(None, &out)?;
    Ok(if errors > 0 { EXIT_VIOLATIONS } else { 0 })
}

fn classify(
    file: &Path,
    batch: &str,
    k_min: usize,
    k_max: Option<usize>,
    format: ModeFormat,
) -> Result<u8, Exit> {
    let trace = read_trace(file)?;
    let k = KInterval::new(k_min, k_max).map_err(|e| Exit::new(EXIT_USAGE, e.to_string()))?;
    let report = classify_mode(&trace, batch, k).map_err(|e| Exit::new(EXIT_USAGE, e.to_string()))?;
    let text = match format {
        ModeFormat::Text => report.to_string(),
        ModeFormat::Json => {
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
    };
    write_out(None, &text)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Exit> {
    let usage = |msg: String| Exit::new(EXIT_USAGE, msg);
    match cli.command {
        Command::Validate { file, format } => validate(&file, format),
        Command::Classify {
            file,
            batch,
            k_min,
            k_max,
            format,
        } => classify(&file, &batch, k_min, k_max, format),
        Command::Generate {
            target,
            seed,
            phenomena,
            classes,
            samples_per_phenomenon,
            k,
            k_min,
            k_max,
            mu,
            mu_placement,
            broader,
            failed_fraction,
            output,
        } => {
            let target: Target = target.parse().map_err(|e: biotrace::GenError| usage(e.to_string()))?;
            let placement: Placement = mu_placement
                .parse()
                .map_err(|e: biotrace::model::ModelError| usage(e.to_string()))?;
            let k = match (k, k_min, k_max) {
                (_, Some(lo), Some(hi)) => KSpec::Range(lo, hi),
                (Some(k), _, _) => KSpec::Fixed(k),
                _ => KSpec::Fixed(2),
            };
            let cfg = GenConfig {
                seed,
                target,
                phenomena,
                classes,
                samples_per_phenomenon,
                k,
                mu,
                placement,
                persons: !broader,
                failed_fraction,
            };
            let trace = generate_trace(&cfg).map_err(|e| usage(e.to_string()))?;
            write_out(output.as_deref(), &serialize_trace(&trace))?;
            Ok(0)
        }
        Command::Mutate {
            file,
            mutation,
            seed,
            output,
        } => {
            let mutation: Mutation = mutation.parse().map_err(|e: biotrace::MutateError| usage(e.to_string()))?;
            let trace = read_trace(&file)?;
            let mutated = mutate_trace(&trace, mutation, seed).map_err(|e| usage(e.to_string()))?;
            write_out(output.as_deref(), &serialize_trace(&mutated))?;
            Ok(0)
        }
        Command::Explain { code } => {
            let code: Code = code.parse().map_err(|e: biotrace::checks::UnknownCode| usage(e.to_string()))?;
            let severity = match code.severity() {
                biotrace::Severity::Error => "error",
                biotrace::Severity::Warning => "warning",
            };
            write_out(None, &format!("{code} ({severity})\n{}\n", code.explain()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(exit) => {
            eprintln!("biotrace: {}", exit.message);
            ExitCode::from(exit.code)
        }
    }
}
