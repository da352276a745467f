//! Artifacts, run manifests and exit codes.

use std::path::Path;

use padic_confluence::Error;
use serde_json::{json, Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

/// What a subcommand produced.
pub struct Outcome {
    /// File stem of the artifact, e.g. `gamma-newton`.
    pub stem: String,
    pub artifact: Value,
    /// Plain-text rendering for the terminal.
    pub human: String,
    /// Certified precisions and verdicts worth surfacing in the manifest.
    pub certified: Value,
    pub status: Status,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Invalid(_)
        | Error::PrimeMismatch(..)
        | Error::UnsupportedPrime(_)
        | Error::MalformedModule(_)
        | Error::Degenerate(_) => EXIT_USAGE,
        _ => EXIT_PRECISION,
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        EXIT_USAGE => "usage",
        _ => "precision",
    }
}

/// Everything needed to reproduce a run. Timing lives under `timings` only,
/// so two runs with the same inputs differ nowhere else.
#[derive(Default)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Option<Value>,
    pub parameters: Map<String, Value>,
    pub inputs: Map<String, Value>,
    pub seconds: f64,
}

impl Manifest {
    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.parameters.insert(key.to_string(), v.into());
    }

    pub fn input(&mut self, key: &str, v: Value) {
        self.inputs.insert(key.to_string(), v);
    }

    pub fn render(&self, outcome: Result<&Outcome, &Error>, artifacts: &[String]) -> Value {
        let mut m = json!({
            "tool": "padic-confluence",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "artifacts": artifacts,
            "timings": { "total_seconds": self.seconds },
        });
        let obj = m.as_object_mut().expect("object");
        match outcome {
            Ok(o) => {
                obj.insert("status".into(), json!(if o.status == Status::Ok { "ok" } else { "check-failed" }));
                obj.insert("certified".into(), o.certified.clone());
            }
            Err(e) => {
                obj.insert("status".into(), json!("error"));
                obj.insert("error".into(), json!({ "kind": error_kind(e), "message": e.to_string() }));
            }
        }
        m
    }
}

fn write(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)
}

/// Write the artifact (if any) and the manifest into `dir`.
pub fn write_run(dir: &Path, stem: &str, artifact: Option<&Value>, manifest: &Manifest, outcome: Result<&Outcome, &Error>) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    if let Some(a) = artifact {
        let name = format!("{stem}.json");
        write(&dir.join(&name), a)?;
        names.push(name);
    }
    let man = format!("{stem}.manifest.json");
    write(&dir.join(&man), &manifest.render(outcome, &names))?;
    names.push(man);
    Ok(names)
}
