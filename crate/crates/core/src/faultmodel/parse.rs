//! Reading the tabular fault-model format and its model-config sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::types::{
    Endianness, FaultModel, FaultModelSpec, Number, OperatorKind, OperatorRow, Param,
    RepresentationType,
};
use super::SpecError;

const REQUIRED_COLUMNS: [&str; 11] = [
    "Fault Model",
    "Position",
    "Span",
    "Type",
    "Op",
    "MIN",
    "MAX",
    "T",
    "DELTA",
    "STATE",
    "VALUE",
];

/// Per-model buffer attributes read from the sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub unit_size: usize,
    pub buffer_size: usize,
    pub endianness: Endianness,
    /// Fixed-point scale keyed by row index.
    pub scales: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sidecar {
    pub seed: Option<u64>,
    pub models: BTreeMap<String, ModelConfig>,
}

#[derive(Default)]
struct PartialConfig {
    unit_size: Option<usize>,
    buffer_size: Option<usize>,
    endianness: Option<Endianness>,
    scales: BTreeMap<usize, f64>,
    line: usize,
}

/// Removes whitespace adjacent to `=` so `key = value` tokenizes like `key=value`.
fn tighten_assignments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space && c != '=' && !out.ends_with('=') && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

pub fn parse_sidecar(text: &str) -> Result<Sidecar, SpecError> {
    let mut sidecar = Sidecar::default();
    let mut sections: Vec<(String, PartialConfig)> = Vec::new();
    let mut current: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let syntax = |message: String| SpecError::Sidecar {
            line: line_no,
            message,
        };
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut rest = line;
        if let Some(header) = rest.strip_prefix('[') {
            let (inside, after) = header
                .split_once(']')
                .ok_or_else(|| syntax("unterminated section header".into()))?;
            let name = inside
                .trim()
                .strip_prefix("model")
                .filter(|n| n.starts_with(char::is_whitespace))
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| syntax(format!("expected `[model <name>]`, found `[{inside}]`")))?;
            if sections.iter().any(|(n, _)| n == name) {
                return Err(SpecError::DuplicateModelConfig {
                    name: name.to_string(),
                });
            }
            sections.push((
                name.to_string(),
                PartialConfig {
                    line: line_no,
                    ..Default::default()
                },
            ));
            current = Some(sections.len() - 1);
            rest = after;
        }

        for token in tighten_assignments(rest).split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key=value, found `{token}`")))?;
            let key = key.to_ascii_lowercase();
            let Some(section) = current else {
                if key == "seed" {
                    let seed = value
                        .parse()
                        .map_err(|_| syntax(format!("invalid seed `{value}`")))?;
                    sidecar.seed = Some(seed);
                    continue;
                }
                return Err(syntax(format!("`{key}` outside of a model section")));
            };
            let config = &mut sections[section].1;
            let parse_count = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| syntax(format!("invalid {key} `{v}`")))
            };
            match key.as_str() {
                "unit_size" => config.unit_size = Some(parse_count(value)?),
                "buffer_size" => config.buffer_size = Some(parse_count(value)?),
                "endianness" => {
                    config.endianness = Some(
                        value
                            .parse()
                            .map_err(|_| syntax(format!("invalid endianness `{value}`")))?,
                    )
                }
                _ => {
                    let row = key
                        .strip_prefix("scale.")
                        .and_then(|r| r.parse::<usize>().ok())
                        .ok_or_else(|| syntax(format!("unknown key `{key}`")))?;
                    let scale: f64 = value
                        .parse()
                        .map_err(|_| syntax(format!("invalid scale `{value}`")))?;
                    config.scales.insert(row, scale);
                }
            }
        }
    }

    for (name, partial) in sections {
        let missing = |key: &str| SpecError::Sidecar {
            line: partial.line,
            message: format!("model `{name}` lacks `{key}`"),
        };
        let config = ModelConfig {
            unit_size: partial.unit_size.ok_or_else(|| missing("unit_size"))?,
            buffer_size: partial.buffer_size.ok_or_else(|| missing("buffer_size"))?,
            endianness: partial.endianness.unwrap_or_default(),
            scales: partial.scales,
        };
        sidecar.models.insert(name, config);
    }
    Ok(sidecar)
}

fn absent(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell == "-"
}

struct Columns {
    index: [usize; 11],
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self, SpecError> {
        let found: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        let bad_header = || SpecError::Header {
            found: found.join(","),
        };
        let mut index = [usize::MAX; 11];
        for (pos, name) in found.iter().enumerate() {
            if name == "#" {
                continue;
            }
            let slot = REQUIRED_COLUMNS
                .iter()
                .position(|c| c.eq_ignore_ascii_case(name))
                .ok_or_else(bad_header)?;
            if index[slot] != usize::MAX {
                return Err(bad_header());
            }
            index[slot] = pos;
        }
        if index.contains(&usize::MAX) {
            return Err(bad_header());
        }
        Ok(Self { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> &'r str {
        let slot = REQUIRED_COLUMNS.iter().position(|c| *c == column).unwrap();
        record.get(self.index[slot]).unwrap_or("")
    }
}

fn parse_row(
    columns: &Columns,
    record: &csv::StringRecord,
    row_index: usize,
) -> Result<OperatorRow, SpecError> {
    let cell = |name: &'static str| columns.get(record, name).trim();
    let bad_number = |column: &str, text: &str| SpecError::BadNumber {
        row: row_index,
        column: column.to_string(),
        text: text.to_string(),
    };

    let fault_model = cell("Fault Model").to_string();
    if fault_model.is_empty() {
        return Err(SpecError::MissingFaultModel { row: row_index });
    }
    let count = |name: &'static str| {
        let text = cell(name);
        text.parse::<usize>().map_err(|_| bad_number(name, text))
    };
    let position = count("Position")?;
    let span = count("Span")?;
    let rep: RepresentationType =
        cell("Type")
            .parse()
            .map_err(|_| SpecError::UnknownRepresentation {
                row: row_index,
                tag: cell("Type").to_string(),
            })?;
    let op: OperatorKind = cell("Op").parse().map_err(|_| SpecError::UnknownOperator {
        row: row_index,
        tag: cell("Op").to_string(),
    })?;
    if !op.accepts(rep) {
        return Err(SpecError::IllegalOperatorForType {
            row: row_index,
            op,
            rep,
        });
    }

    let allow_hex = rep == RepresentationType::Hex;
    let number = |param: Param| -> Result<Option<Number>, SpecError> {
        let text = cell(param.column());
        if absent(text) {
            return Ok(None);
        }
        Number::parse(text, allow_hex)
            .map(Some)
            .ok_or_else(|| bad_number(param.column(), text))
    };
    let state_text = cell("STATE");
    let state = if absent(state_text) {
        None
    } else {
        Some(
            state_text
                .parse::<i64>()
                .map_err(|_| bad_number("STATE", state_text))?,
        )
    };

    let row = OperatorRow {
        row_index,
        fault_model,
        position,
        span,
        rep,
        op,
        min: number(Param::Min)?,
        max: number(Param::Max)?,
        threshold: number(Param::T)?,
        delta: number(Param::Delta)?,
        state,
        value: number(Param::Value)?,
        scale: None,
    };
    if let Some(param) = row.missing_params().next() {
        return Err(SpecError::MissingParameter {
            row: row_index,
            param,
        });
    }
    Ok(row)
}

/// Parses the operator table and attaches every row to its fault model.
///
/// Only structural problems are errors here; semantic rules (ranges,
/// parameter bounds) are reported by [`super::validate_spec`].
pub fn parse_spec(csv_text: &str, sidecar_text: &str) -> Result<FaultModelSpec, SpecError> {
    let sidecar = parse_sidecar(sidecar_text)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(csv_text.as_bytes());
    let columns = Columns::from_header(reader.headers()?)?;

    let mut models: Vec<FaultModel> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let mut row = parse_row(&columns, &record, idx + 1)?;
        let config =
            sidecar
                .models
                .get(&row.fault_model)
                .ok_or_else(|| SpecError::MissingSidecarEntry {
                    name: row.fault_model.clone(),
                })?;
        if row.position.saturating_add(row.span) > config.buffer_size {
            return Err(SpecError::Range {
                row: row.row_index,
                position: row.position,
                span: row.span,
                buffer_size: config.buffer_size,
            });
        }
        row.scale = config.scales.get(&row.row_index).copied();
        match models.iter_mut().find(|m| m.name == row.fault_model) {
            Some(model) => model.rows.push(row),
            None => models.push(FaultModel {
                name: row.fault_model.clone(),
                unit_size: config.unit_size,
                buffer_size: config.buffer_size,
                endianness: config.endianness,
                rows: vec![row],
            }),
        }
    }

    for (name, config) in &sidecar.models {
        for row in config.scales.keys() {
            let owner = models
                .iter()
                .flat_map(|m| &m.rows)
                .find(|r| r.row_index == *row)
                .map(|r| r.fault_model.as_str());
            if owner != Some(name.as_str()) {
                return Err(SpecError::Sidecar {
                    line: 0,
                    message: format!("scale.{row} in model `{name}` does not name one of its rows"),
                });
            }
        }
    }

    Ok(FaultModelSpec {
        models,
        source_path: String::new(),
        global_seed: sidecar.seed.unwrap_or(0),
    })
}

fn cell(number: Option<Number>) -> String {
    number.map_or_else(|| "-".to_string(), |n| n.to_string())
}

/// Canonical CSV form of a set of fault models, rows in row-index order.
pub fn emit_csv(spec: &FaultModelSpec) -> String {
    let mut rows: Vec<&OperatorRow> = spec.models.iter().flat_map(|m| &m.rows).collect();
    rows.sort_by_key(|r| r.row_index);
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["#"];
    header.extend(REQUIRED_COLUMNS);
    writer.write_record(&header).expect("in-memory write");
    for row in rows {
        writer
            .write_record([
                row.row_index.to_string(),
                row.fault_model.clone(),
                row.position.to_string(),
                row.span.to_string(),
                row.rep.to_string(),
                row.op.to_string(),
                cell(row.min),
                cell(row.max),
                cell(row.threshold),
                cell(row.delta),
                row.state.map_or_else(|| "-".to_string(), |s| s.to_string()),
                cell(row.value),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Canonical sidecar form of a set of fault models.
pub fn emit_sidecar(spec: &FaultModelSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", spec.global_seed);
    for model in &spec.models {
        let _ = writeln!(out, "\n[model {}]", model.name);
        let _ = writeln!(out, "unit_size = {}", model.unit_size);
        let _ = writeln!(out, "buffer_size = {}", model.buffer_size);
        let _ = writeln!(out, "endianness = {}", model.endianness);
        for row in &model.rows {
            if let Some(scale) = row.scale {
                let _ = writeln!(out, "scale.{} = {:?}", row.row_index, scale);
            }
        }
    }
    out
}
