//! The `.biotrace` format: UTF-8 JSON Lines.
//!
//! Line 1 is the header, every further line one record tagged by `ev`.
//! Field order in canonical output is fixed:
//!
//! ```text
//! {"format_version":"1","mu":1,"mu_placement":"sampling"}
//! {"ev":"structure","id":"st1"}
//! {"ev":"phenomenon","id":"ph1","person":true,"enrolled":true,"structures":["st1"]}
//! {"ev":"class","id":"c1","bound":"ph1"}
//! {"ev":"sample","id":"sm1","sources":["st1"]}
//! {"ev":"preprocess","id":"sp1","input":"sm1"}
//! {"ev":"extract","id":"t1","inputs":["sp1"]}
//! {"ev":"quality","template":"t1","result":"passed"}
//! {"ev":"recognize","batch":"b1","template":"t1","claimed":"ph1","output":"c1"}
//! ```
//!
//! `bound` and `claimed` are omitted when absent; `output` is always
//! present and `null` stands for the unrecognized class. Canonical output
//! lists all declarations before all events.
//!
//! A reference to an entity that is declared or produced only on a later
//! line is rejected as a forward reference. A reference to a name that
//! never appears is accepted here and reported by validation.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    Arity, ClassDecl, Declaration, EntityKind, MappingEvent, PhenomenonDecl, Placement,
    QualityResult, StructureDecl, Trace, UNRECOGNIZED,
};

pub const FORMAT_VERSION: &str = "1";
pub const FILE_EXTENSION: &str = "biotrace";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ParseCode {
    #[serde(rename = "PARSE_SYNTAX")]
    Syntax,
    #[serde(rename = "PARSE_UNKNOWN_TAG")]
    UnknownTag,
    #[serde(rename = "PARSE_DUP_ID")]
    DuplicateId,
    #[serde(rename = "PARSE_FORWARD_REF")]
    ForwardRef,
    #[serde(rename = "PARSE_BAD_HEADER")]
    BadHeader,
}

impl ParseCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseCode::Syntax => "PARSE_SYNTAX",
            ParseCode::UnknownTag => "PARSE_UNKNOWN_TAG",
            ParseCode::DuplicateId => "PARSE_DUP_ID",
            ParseCode::ForwardRef => "PARSE_FORWARD_REF",
            ParseCode::BadHeader => "PARSE_BAD_HEADER",
        }
    }
}

impl fmt::Display for ParseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub struct ParseError {
    pub code: ParseCode,
    /// 1-based.
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {}", self.code, self.line)?;
        if let Some(field) = &self.field {
            write!(f, ", field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

fn err(code: ParseCode, line: usize, field: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        code,
        line,
        field: field.map(str::to_string),
        message: message.into(),
    }
}

/// Typed access to the fields of one JSON object, tracking which were read
/// so that leftovers can be rejected.
struct Fields<'a> {
    line: usize,
    map: &'a Map<String, Value>,
    used: HashSet<&'static str>,
    code: ParseCode,
}

impl<'a> Fields<'a> {
    fn new(line: usize, map: &'a Map<String, Value>, code: ParseCode) -> Self {
        Fields {
            line,
            map,
            used: HashSet::new(),
            code,
        }
    }

    fn fail(&self, field: &str, message: impl Into<String>) -> ParseError {
        err(self.code, self.line, Some(field), message)
    }

    fn raw(&mut self, name: &'static str) -> Option<&'a Value> {
        self.used.insert(name);
        self.map.get(name)
    }

    fn required(&mut self, name: &'static str) -> Result<&'a Value, ParseError> {
        self.raw(name)
            .ok_or_else(|| self.fail(name, "missing required field"))
    }

    fn name_value(&self, field: &str, value: &'a Value) -> Result<String, ParseError> {
        match value {
            Value::String(s) if !s.is_empty() => Ok(s.clone()),
            Value::String(_) => Err(self.fail(field, "names must be non-empty")),
            _ => Err(self.fail(field, "expected a string")),
        }
    }

    fn name(&mut self, field: &'static str) -> Result<String, ParseError> {
        let value = self.required(field)?;
        self.name_value(field, value)
    }

    fn optional_name(&mut self, field: &'static str) -> Result<Option<String>, ParseError> {
        match self.raw(field) {
            None => Ok(None),
            Some(value) => self.name_value(field, value).map(Some),
        }
    }

    /// Present, and either a name or `null`.
    fn nullable_name(&mut self, field: &'static str) -> Result<Option<String>, ParseError> {
        match self.required(field)? {
            Value::Null => Ok(None),
            value => self.name_value(field, value).map(Some),
        }
    }

    fn names(&mut self, field: &'static str) -> Result<Vec<String>, ParseError> {
        match self.required(field)? {
            Value::Array(items) => items
                .iter()
                .map(|item| self.name_value(field, item))
                .collect(),
            _ => Err(self.fail(field, "expected an array of strings")),
        }
    }

    fn flag(&mut self, field: &'static str) -> Result<bool, ParseError> {
        self.required(field)?
            .as_bool()
            .ok_or_else(|| self.fail(field, "expected true or false"))
    }

    fn finish(self) -> Result<(), ParseError> {
        let mut extra: Vec<&String> = self
            .map
            .keys()
            .filter(|k| !self.used.contains(k.as_str()))
            .collect();
        extra.sort();
        match extra.first() {
            None => Ok(()),
            Some(field) => Err(self.fail(field, "unknown field")),
        }
    }
}

fn object(line: usize, text: &str, code: ParseCode) -> Result<Map<String, Value>, ParseError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(err(code, line, None, "expected a JSON object")),
        Err(e) => Err(err(code, line, None, format!("malformed JSON: {e}"))),
    }
}

fn parse_header(text: Option<&str>) -> Result<Arity, ParseError> {
    let bad = |field: Option<&str>, msg: &str| err(ParseCode::BadHeader, 1, field, msg);
    let text = text.ok_or_else(|| bad(None, "document is empty; expected a header line"))?;
    let map = object(1, text, ParseCode::BadHeader)?;
    let mut fields = Fields::new(1, &map, ParseCode::BadHeader);

    match fields.required("format_version")? {
        Value::String(v) if v == FORMAT_VERSION => {}
        Value::String(v) => {
            return Err(bad(
                Some("format_version"),
                &format!("unsupported format version `{v}`"),
            ))
        }
        _ => return Err(bad(Some("format_version"), "expected a string")),
    }
    let mu = fields
        .required("mu")?
        .as_u64()
        .and_then(|mu| u32::try_from(mu).ok())
        .filter(|&mu| mu >= 1)
        .ok_or_else(|| bad(Some("mu"), "expected an integer ≥ 1"))?;
    let placement: Placement = fields
        .required("mu_placement")?
        .as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(Some("mu_placement"), "expected \"sampling\" or \"extraction\""))?;
    fields.finish()?;
    Arity::new(mu, placement).map_err(|e| bad(Some("mu"), &e.to_string()))
}

enum Record {
    Decl(Declaration),
    Event(MappingEvent),
}

fn parse_record(line: usize, text: &str) -> Result<Record, ParseError> {
    let map = object(line, text, ParseCode::Syntax)?;
    let mut f = Fields::new(line, &map, ParseCode::Syntax);
    let tag = match f.required("ev")? {
        Value::String(tag) => tag.as_str(),
        _ => return Err(f.fail("ev", "expected a string tag")),
    };
    let record = match tag {
        "structure" => Record::Decl(Declaration::Structure(StructureDecl { name: f.name("id")? })),
        "phenomenon" => Record::Decl(Declaration::Phenomenon(PhenomenonDecl {
            name: f.name("id")?,
            is_person: f.flag("person")?,
            is_enrolled: f.flag("enrolled")?,
            structures: f.names("structures")?,
        })),
        "class" => {
            let name = f.name("id")?;
            if name == UNRECOGNIZED {
                return Err(f.fail("id", "ν is the reserved unrecognized class"));
            }
            Record::Decl(Declaration::Class(ClassDecl {
                name,
                bound: f.optional_name("bound")?,
            }))
        }
        "sample" => Record::Event(MappingEvent::Sample {
            sample: f.name("id")?,
            sources: f.names("sources")?,
        }),
        "preprocess" => Record::Event(MappingEvent::Preprocess {
            output: f.name("id")?,
            input: f.name("input")?,
        }),
        "extract" => Record::Event(MappingEvent::Extract {
            template: f.name("id")?,
            inputs: f.names("inputs")?,
        }),
        "quality" => {
            let template = f.name("template")?;
            let result = match f.required("result")?.as_str() {
                Some("passed") => QualityResult::Passed,
                Some("failed") => QualityResult::Failed,
                _ => return Err(f.fail("result", "expected \"passed\" or \"failed\"")),
            };
            Record::Event(MappingEvent::Quality { template, result })
        }
        "recognize" => Record::Event(MappingEvent::Recognize {
            batch: f.name("batch")?,
            template: f.name("template")?,
            claimed: f.optional_name("claimed")?,
            output: f.nullable_name("output")?,
        }),
        other => {
            return Err(err(
                ParseCode::UnknownTag,
                line,
                Some("ev"),
                format!("unknown record tag `{other}`"),
            ))
        }
    };
    f.finish()?;
    Ok(record)
}

/// Every reference a record makes: `(field, kind, name)`.
fn references(record: &Record) -> Vec<(&'static str, EntityKind, &str)> {
    use EntityKind::*;
    match record {
        Record::Decl(Declaration::Structure(_)) => vec![],
        Record::Decl(Declaration::Phenomenon(p)) => p
            .structures
            .iter()
            .map(|s| ("structures", Structure, s.as_str()))
            .collect(),
        Record::Decl(Declaration::Class(c)) => c
            .bound
            .iter()
            .map(|p| ("bound", Phenomenon, p.as_str()))
            .collect(),
        Record::Event(MappingEvent::Sample { sources, .. }) => sources
            .iter()
            .map(|s| ("sources", Structure, s.as_str()))
            .collect(),
        Record::Event(MappingEvent::Preprocess { input, .. }) => {
            vec![("input", Sample, input.as_str())]
        }
        Record::Event(MappingEvent::Extract { inputs, .. }) => inputs
            .iter()
            .map(|s| ("inputs", Preprocessed, s.as_str()))
            .collect(),
        Record::Event(MappingEvent::Quality { template, .. }) => {
            vec![("template", Template, template.as_str())]
        }
        Record::Event(MappingEvent::Recognize {
            template,
            claimed,
            output,
            ..
        }) => {
            let mut refs = vec![("template", Template, template.as_str())];
            refs.extend(claimed.iter().map(|p| ("claimed", Phenomenon, p.as_str())));
            refs.extend(output.iter().map(|c| ("output", Class, c.as_str())));
            refs
        }
    }
}

/// The `(kind, name)` a record declares or produces.
fn introduces(record: &Record) -> Option<(EntityKind, &str)> {
    match record {
        Record::Decl(d) => Some(match d {
            Declaration::Structure(s) => (EntityKind::Structure, s.name.as_str()),
            Declaration::Phenomenon(p) => (EntityKind::Phenomenon, p.name.as_str()),
            Declaration::Class(c) => (EntityKind::Class, c.name.as_str()),
        }),
        Record::Event(MappingEvent::Sample { sample, .. }) => Some((EntityKind::Sample, sample)),
        Record::Event(MappingEvent::Preprocess { output, .. }) => {
            Some((EntityKind::Preprocessed, output))
        }
        Record::Event(MappingEvent::Extract { template, .. }) => {
            Some((EntityKind::Template, template))
        }
        Record::Event(_) => None,
    }
}

/// Strict parse of a `.biotrace` document.
pub fn parse_trace(text: &str) -> Result<Trace, ParseError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = if body.is_empty() && text.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect::<Vec<_>>()
    };
    if lines.first().is_some_and(|l| l.trim().is_empty()) {
        lines.clear();
    }
    let arity = parse_header(lines.first().copied())?;

    let mut records = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, text) in lines.iter().enumerate().skip(1) {
        let line = i + 1;
        if text.trim().is_empty() {
            return Err(err(ParseCode::Syntax, line, None, "blank line"));
        }
        records.push((line, parse_record(line, text)?));
    }

    let everywhere: HashSet<(EntityKind, &str)> =
        records.iter().filter_map(|(_, r)| introduces(r)).collect();
    let mut so_far: HashSet<(EntityKind, &str)> = HashSet::new();
    let mut trace = Trace::new(arity);
    for (line, record) in &records {
        for (field, kind, name) in references(record) {
            if !so_far.contains(&(kind, name)) && everywhere.contains(&(kind, name)) {
                return Err(err(
                    ParseCode::ForwardRef,
                    *line,
                    Some(field),
                    format!("{kind} `{name}` is referenced before it appears"),
                ));
            }
        }
        if let Some(id) = introduces(record) {
            let fresh = so_far.insert(id);
            if !fresh && matches!(record, Record::Decl(_)) {
                return Err(err(
                    ParseCode::DuplicateId,
                    *line,
                    Some("id"),
                    format!("{} `{}` is already declared", id.0, id.1),
                ));
            }
        }
    }
    for (_, record) in records {
        match record {
            Record::Decl(d) => trace.declarations.push(d),
            Record::Event(e) => trace.events.push(e),
        }
    }
    Ok(trace)
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn quote_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", quoted.join(","))
}

/// Canonical text of a trace: header, declarations, events; one record
/// per line, fixed field order, no optional whitespace, LF endings.
pub fn serialize_trace(trace: &Trace) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"format_version\":{},\"mu\":{},\"mu_placement\":{}}}\n",
        quote(FORMAT_VERSION),
        trace.arity.mu(),
        quote(trace.arity.placement().as_str())
    ));
    for decl in &trace.declarations {
        let line = match decl {
            Declaration::Structure(s) => {
                format!("{{\"ev\":\"structure\",\"id\":{}}}", quote(&s.name))
            }
            Declaration::Phenomenon(p) => format!(
                "{{\"ev\":\"phenomenon\",\"id\":{},\"person\":{},\"enrolled\":{},\"structures\":{}}}",
                quote(&p.name),
                p.is_person,
                p.is_enrolled,
                quote_list(&p.structures)
            ),
            Declaration::Class(c) => match &c.bound {
                Some(bound) => format!(
                    "{{\"ev\":\"class\",\"id\":{},\"bound\":{}}}",
                    quote(&c.name),
                    quote(bound)
                ),
                None => format!("{{\"ev\":\"class\",\"id\":{}}}", quote(&c.name)),
            },
        };
        out.push_str(&line);
        out.push('\n');
    }
    for event in &trace.events {
        let line = match event {
            MappingEvent::Sample { sample, sources } => format!(
                "{{\"ev\":\"sample\",\"id\":{},\"sources\":{}}}",
                quote(sample),
                quote_list(sources)
            ),
            MappingEvent::Preprocess { output, input } => format!(
                "{{\"ev\":\"preprocess\",\"id\":{},\"input\":{}}}",
                quote(output),
                quote(input)
            ),
            MappingEvent::Extract { template, inputs } => format!(
                "{{\"ev\":\"extract\",\"id\":{},\"inputs\":{}}}",
                quote(template),
                quote_list(inputs)
            ),
            MappingEvent::Quality { template, result } => format!(
                "{{\"ev\":\"quality\",\"template\":{},\"result\":{}}}",
                quote(template),
                quote(result.as_str())
            ),
            MappingEvent::Recognize {
                batch,
                template,
                claimed,
                output,
            } => {
                let claimed = claimed
                    .as_ref()
                    .map(|c| format!(",\"claimed\":{}", quote(c)))
                    .unwrap_or_default();
                let output = output.as_deref().map_or_else(|| "null".to_string(), quote);
                format!(
                    "{{\"ev\":\"recognize\",\"batch\":{},\"template\":{}{claimed},\"output\":{output}}}",
                    quote(batch),
                    quote(template)
                )
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
