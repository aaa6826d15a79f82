//! Batch front-end: instance files in, text or JSON reports out.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub mod commands;
pub mod schema;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_UNSTABLE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Cohomology,
    Pair,
    Atiyah,
    Deform,
    Tot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cohomology => "cohomology",
            Command::Pair => "pair",
            Command::Atiyah => "atiyah",
            Command::Deform => "deform",
            Command::Tot => "tot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub window: Option<(i64, i64)>,
    pub nmax: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { window: None, nmax: semireg::tot::DEFAULT_NMAX, seed: 0 }
    }
}

/// A failed run with a machine-readable reason.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Schema(String),
    Invariant(Value),
    Unstable(Value),
}

impl Failure {
    pub fn invariant(stage: &str, message: &str) -> Self {
        Failure::Invariant(json!({ "stage": stage, "message": message }))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => EXIT_SCHEMA,
            Failure::Invariant(_) => EXIT_INVARIANT,
            Failure::Unstable(_) => EXIT_UNSTABLE,
        }
    }

    fn reason(&self) -> Value {
        match self {
            Failure::Schema(m) => json!({ "kind": "schema", "message": m }),
            Failure::Invariant(v) => json!({ "kind": "invariant", "details": v }),
            Failure::Unstable(v) => json!({ "kind": "unstable", "details": v }),
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a command on raw input bytes; returns the exit code and the rendered report.
pub fn execute(cmd: Command, input: &[u8], opts: &Options, format: Format) -> (i32, String) {
    let mut envelope = Map::new();
    envelope.insert("format-version".into(), json!(schema::FORMAT_VERSION));
    envelope.insert("rationals-as-strings".into(), json!(true));
    envelope.insert("command".into(), json!(cmd.name()));
    envelope.insert("input-digest".into(), json!(digest(input)));
    let code = match schema::parse(input).and_then(|f| commands::run(cmd, &f, opts)) {
        Ok(result) => {
            envelope.insert("result".into(), result);
            EXIT_OK
        }
        Err(f) => {
            envelope.insert("error".into(), f.reason());
            f.exit_code()
        }
    };
    let v = Value::Object(envelope);
    let out = match format {
        Format::Json => serde_json::to_string_pretty(&v).expect("serializable") + "\n",
        Format::Text => render_text(&v),
    };
    (code, out)
}

/// Indented key/value rendering; arrays of scalars stay on one line.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    text_into(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("({})", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(a) if a.iter().all(|x| x.is_array() && scalar(x).is_some()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(" ")))
        }
        _ => None,
    }
}

fn text_into(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text_into(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        text_into(out, x, indent + 1);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_default())),
    }
}
