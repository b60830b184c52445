use std::fmt;
use std::fs;
use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Format, OutputArgs};

/// Invalid flag values or combinations; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn format_or(
    out: &OutputArgs,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format> {
    let f = out.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(usage(
            format!("`{command}` does not support --format {f:?}").to_lowercase(),
        ));
    }
    Ok(f)
}

/// JSON envelope shared by every report.
pub struct Envelope {
    command: &'static str,
    seed: Option<u64>,
    config: Value,
    started: Instant,
}

impl Envelope {
    pub fn new(command: &'static str, seed: Option<u64>, config: &impl Serialize) -> Self {
        Self {
            command,
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
            started: Instant::now(),
        }
    }

    pub fn render(&self, result: impl Serialize, timing: bool) -> Vec<u8> {
        let mut v = json!({
            "command": self.command,
            "version": thicket_core::VERSION,
            "seed": self.seed,
            "config": self.config,
            "result": result,
        });
        if timing {
            v["elapsed_ms"] = json!(self.started.elapsed().as_millis() as u64);
        }
        let mut bytes = serde_json::to_vec_pretty(&v).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }
}

pub fn emit(out: &OutputArgs, bytes: &[u8]) -> Result<()> {
    write_to(out.output.as_deref(), bytes)
}

pub fn write_to(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .context("writing stdout"),
    }
}
