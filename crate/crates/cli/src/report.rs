//! Rendering of run reports as JSON or CSV.

use crate::commands::{Command, Outcome, Table};
use crate::config::JobConfig;
use crate::error::CliError;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Top-level JSON document. Field order is fixed and nested objects are
/// key-sorted, so identical inputs give identical bytes.
#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub passed: bool,
    pub config: &'a JobConfig,
    pub result: &'a Value,
}

fn csv_text(table: &Table) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numeric(format!("csv: {e}"));
    writer.write_record(&table.header).map_err(fail)?;
    for row in &table.rows {
        writer.write_record(row).map_err(fail)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Numeric(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numeric(e.to_string()))
}

/// Renders an outcome; CSV falls back to a single `passed` row when the
/// command produced no table.
pub fn render(
    command: Command,
    config: &JobConfig,
    outcome: &Outcome,
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let report = RunReport {
                schema: SCHEMA_VERSION,
                tool: "opoly",
                version: env!("CARGO_PKG_VERSION"),
                command: command.name(),
                passed: outcome.passed,
                config,
                result: &outcome.result,
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv if outcome.table.header.is_empty() => csv_text(&Table {
            header: vec!["passed".into()],
            rows: vec![vec![outcome.passed.to_string()]],
        }),
        Format::Csv => csv_text(&outcome.table),
    }
}
