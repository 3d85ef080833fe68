//! Tabular fault-model specifications: parsing, validation, and operator advice.

mod advise;
mod parse;
mod types;
mod validate;

use std::path::Path;

use thiserror::Error;

pub use advise::{advise_operators, Advice, AdviseError, DataItemProfile, Dependency, Multiplicity, Nature};
pub use parse::{emit_csv, emit_sidecar, parse_sidecar, parse_spec, ModelConfig, Sidecar};
pub use types::{
    Endianness, FaultModel, FaultModelSpec, Number, OperatorKind, OperatorRow, Param,
    RepresentationType,
};
pub use validate::{validate_spec, Diagnostic, Rule};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad header: unexpected or duplicate column {found:?}")]
    Header { found: String },
    #[error("row {row}: missing fault model name")]
    MissingFaultModel { row: usize },
    #[error("row {row}: column {column} holds an invalid number {text:?}")]
    BadNumber {
        row: usize,
        column: String,
        text: String,
    },
    #[error("row {row}: unknown operator {tag:?}")]
    UnknownOperator { row: usize, tag: String },
    #[error("row {row}: unknown representation type {tag:?}")]
    UnknownRepresentation { row: usize, tag: String },
    #[error("row {row}: missing parameter {param}")]
    MissingParameter { row: usize, param: Param },
    #[error("row {row}: operator {op} cannot target a {rep} item")]
    IllegalOperatorForType {
        row: usize,
        op: OperatorKind,
        rep: RepresentationType,
    },
    #[error("row {row}: position {position} + span {span} exceeds buffer size {buffer_size}")]
    Range {
        row: usize,
        position: usize,
        span: usize,
        buffer_size: usize,
    },
    #[error("fault model {name:?} is configured twice")]
    DuplicateModelConfig { name: String },
    #[error("no model configuration for fault model {name:?}")]
    MissingSidecarEntry { name: String },
    #[error("model config line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error("fault models have {} problem(s):\n{}", .0.len(), render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render_diagnostics(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses and validates; any diagnostic turns into [`SpecError::Invalid`].
pub fn load_spec(csv_text: &str, sidecar_text: &str) -> Result<FaultModelSpec, SpecError> {
    let spec = parse_spec(csv_text, sidecar_text)?;
    let diagnostics = validate_spec(&spec);
    if diagnostics.is_empty() {
        Ok(spec)
    } else {
        Err(SpecError::Invalid(diagnostics))
    }
}

pub fn read_text(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_files(csv_path: &Path, sidecar_path: &Path) -> Result<FaultModelSpec, SpecError> {
    let mut spec = load_spec(&read_text(csv_path)?, &read_text(sidecar_path)?)?;
    spec.source_path = csv_path.display().to_string();
    Ok(spec)
}
