use std::path::Path;

use multimatrix::checks::CheckOutcome;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document every subcommand except `sample` and `transform derive`
/// writes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<CheckOutcome>,
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl Report {
    pub fn new(command: &'static str, inputs: Value, results: Value) -> Self {
        Self { command, inputs, results, checks: Vec::new(), seed: None, version: VERSION }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `out`, or to standard output.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::invalid(e.to_string()))
        }
    }
}
