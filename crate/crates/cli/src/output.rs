use std::fs;
use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to regenerate an output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`, 0 when unset.
    pub timestamp: u64,
    pub parallel_build: bool,
    /// The flags as parsed.
    pub args: serde_json::Value,
    /// Values derived from the flags.
    pub resolved: serde_json::Value,
}

impl Manifest {
    pub fn new<A: Serialize>(command: &str, args: &A, resolved: serde_json::Value) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            parallel_build: cfg!(feature = "parallel"),
            args: serde_json::to_value(args).expect("arguments serialize"),
            resolved,
        }
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Destination of a command's output.
pub struct Sink<'a> {
    path: Option<&'a str>,
}

impl<'a> Sink<'a> {
    pub fn new(path: Option<&'a str>) -> Self {
        Self { path }
    }

    pub fn raw(&self, text: &str) -> Result<(), CliError> {
        match self.path {
            Some(p) => fs::write(p, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.raw(&text)
    }

    /// CSV body preceded by a `# manifest` comment line.
    pub fn csv(&self, manifest: &Manifest, body: &str) -> Result<(), CliError> {
        let line = serde_json::to_string(manifest).expect("manifest serializes");
        self.raw(&format!("# manifest {line}\n{body}"))
    }
}
