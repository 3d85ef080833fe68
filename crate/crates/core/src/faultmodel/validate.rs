use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{FaultModel, FaultModelSpec, Number, OperatorKind, OperatorRow, Param};
use crate::codec::{CodecError, ItemLocator};
use crate::engine::{resolve, ResolveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    EmptySpec,
    DuplicateModel,
    EmptyModel,
    UnitSize,
    BufferSize,
    RowModelMismatch,
    ZeroSpan,
    OutOfBuffer,
    MissingParam,
    IllegalOpType,
    NonFiniteParam,
    MinGtMax,
    BfBitRange,
    BfState,
    BfValueMin,
    BfValueMax,
    HvValue,
    WidthUnsupported,
    ScaleRequired,
    ScaleInvalid,
    NonIntegralParam,
    ParamRange,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptySpec => "EMPTY_SPEC",
            Rule::DuplicateModel => "DUPLICATE_MODEL",
            Rule::EmptyModel => "EMPTY_MODEL",
            Rule::UnitSize => "UNIT_SIZE",
            Rule::BufferSize => "BUFFER_SIZE",
            Rule::RowModelMismatch => "ROW_MODEL_MISMATCH",
            Rule::ZeroSpan => "ZERO_SPAN",
            Rule::OutOfBuffer => "OUT_OF_BUFFER",
            Rule::MissingParam => "MISSING_PARAM",
            Rule::IllegalOpType => "ILLEGAL_OP_TYPE",
            Rule::NonFiniteParam => "NON_FINITE_PARAM",
            Rule::MinGtMax => "MIN_GT_MAX",
            Rule::BfBitRange => "BF_BIT_RANGE",
            Rule::BfState => "BF_STATE",
            Rule::BfValueMin => "BF_VALUE_MIN",
            Rule::BfValueMax => "BF_VALUE_MAX",
            Rule::HvValue => "HV_VALUE",
            Rule::WidthUnsupported => "WIDTH_UNSUPPORTED",
            Rule::ScaleRequired => "SCALE_REQUIRED",
            Rule::ScaleInvalid => "SCALE_INVALID",
            Rule::NonIntegralParam => "NON_INTEGRAL_PARAM",
            Rule::ParamRange => "PARAM_RANGE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub rule: Rule,
    pub row_index: Option<usize>,
    pub fault_model: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn spec(rule: Rule, message: impl Into<String>) -> Self {
        Self {
            rule,
            row_index: None,
            fault_model: None,
            message: message.into(),
        }
    }

    fn model(rule: Rule, model: &FaultModel, message: impl Into<String>) -> Self {
        Self {
            rule,
            row_index: None,
            fault_model: Some(model.name.clone()),
            message: message.into(),
        }
    }

    fn row(rule: Rule, model: &FaultModel, row: &OperatorRow, message: impl Into<String>) -> Self {
        Self {
            rule,
            row_index: Some(row.row_index),
            fault_model: Some(model.name.clone()),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.row_index, &self.fault_model) {
            (Some(row), Some(model)) => write!(f, "row {row} ({model}) ")?,
            (Some(row), None) => write!(f, "row {row} ")?,
            (None, Some(model)) => write!(f, "{model} ")?,
            (None, None) => {}
        }
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Checks every invariant of parsed fault models; an empty list means valid.
pub fn validate_spec(spec: &FaultModelSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.models.is_empty() {
        out.push(Diagnostic::spec(Rule::EmptySpec, "no fault models"));
    }
    let mut names = HashSet::new();
    for model in &spec.models {
        if !names.insert(model.name.as_str()) {
            out.push(Diagnostic::model(
                Rule::DuplicateModel,
                model,
                "fault model name used more than once",
            ));
        }
        validate_model(model, &mut out);
    }
    out.sort_by_key(|d| (d.row_index.is_some(), d.row_index));
    out
}

fn validate_model(model: &FaultModel, out: &mut Vec<Diagnostic>) {
    if model.rows.is_empty() {
        out.push(Diagnostic::model(Rule::EmptyModel, model, "fault model has no rows"));
    }
    if model.unit_size == 0 {
        out.push(Diagnostic::model(Rule::UnitSize, model, "unit_size must be at least 1"));
    }
    if model.buffer_size == 0 {
        out.push(Diagnostic::model(Rule::BufferSize, model, "buffer_size must be at least 1"));
    }
    for row in &model.rows {
        let before = out.len();
        structural_checks(model, row, out);
        if out.len() == before && model.unit_size > 0 {
            resolution_checks(model, row, out);
        }
    }
}

fn structural_checks(model: &FaultModel, row: &OperatorRow, out: &mut Vec<Diagnostic>) {
    let mut push = |rule: Rule, message: String| out.push(Diagnostic::row(rule, model, row, message));

    if row.fault_model != model.name {
        push(
            Rule::RowModelMismatch,
            format!("row names fault model {:?}", row.fault_model),
        );
    }
    if row.span == 0 {
        push(Rule::ZeroSpan, "span must be at least 1".into());
    }
    if row.position + row.span > model.buffer_size {
        push(
            Rule::OutOfBuffer,
            format!(
                "units {}..{} exceed buffer size {}",
                row.position,
                row.position + row.span,
                model.buffer_size
            ),
        );
    }
    if !row.op.accepts(row.rep) {
        push(
            Rule::IllegalOpType,
            format!("operator {} cannot target a {} item", row.op, row.rep),
        );
    }
    let missing: Vec<Param> = row.missing_params().collect();
    for param in &missing {
        push(Rule::MissingParam, format!("{} requires {param}", row.op));
    }
    for param in Param::ALL {
        if let Some(n) = row.param(param) {
            if !n.is_finite() {
                push(Rule::NonFiniteParam, format!("{param} is not finite"));
            }
        }
    }
    if let Some(scale) = row.scale {
        if !(scale.is_finite() && scale > 0.0) {
            push(Rule::ScaleInvalid, format!("scale {scale} must be positive and finite"));
        }
    }
    if !missing.is_empty() {
        return;
    }

    let needs_ordered_range = matches!(
        row.op,
        OperatorKind::Vor | OperatorKind::Fvor | OperatorKind::Inv | OperatorKind::Bf
    );
    if needs_ordered_range {
        if let (Some(min), Some(max)) = (row.min, row.max) {
            if min.value_cmp(max) == Some(std::cmp::Ordering::Greater) {
                push(Rule::MinGtMax, format!("MIN {min} is greater than MAX {max}"));
            }
        }
    }

    let width = row.span * model.unit_size;
    if row.op == OperatorKind::Bf {
        let bits = width as i128 * 8;
        let min = row.min.and_then(Number::as_integer);
        let max = row.max.and_then(Number::as_integer);
        match (min, max) {
            (Some(min), Some(max)) if min >= 0 && max < bits => {
                let value = row.value.and_then(Number::as_integer);
                match value {
                    Some(v) if v < 1 => push(Rule::BfValueMin, format!("VALUE {v} must be at least 1")),
                    Some(v) if min <= max && v > max - min + 1 => push(
                        Rule::BfValueMax,
                        format!("VALUE {v} exceeds the {} positions in [MIN, MAX]", max - min + 1),
                    ),
                    Some(_) => {}
                    None => push(Rule::NonIntegralParam, "VALUE must be an integer".into()),
                }
            }
            _ => push(
                Rule::BfBitRange,
                format!("bit positions MIN/MAX must be integers in 0..{bits}"),
            ),
        }
        if !matches!(row.state, Some(-1..=1)) {
            push(Rule::BfState, "STATE must be -1, 0 or 1".into());
        }
    }
    if row.op == OperatorKind::Hv && !matches!(row.value.and_then(Number::as_integer), Some(v) if v >= 1) {
        push(Rule::HvValue, "VALUE must be an integer of at least 1".into());
    }

    if row.span > 0 {
        let locator = ItemLocator::for_row(model, row);
        match locator.encoding() {
            Err(CodecError::ScaleRequired { rep, width }) => push(
                Rule::ScaleRequired,
                format!("{rep} item of {width} bytes needs a scale entry"),
            ),
            Err(CodecError::UnsupportedWidth { rep, width }) => push(
                Rule::WidthUnsupported,
                format!("{rep} items of {width} bytes are not supported"),
            ),
            _ => {}
        }
    }
}

fn resolution_checks(model: &FaultModel, row: &OperatorRow, out: &mut Vec<Diagnostic>) {
    let locator = ItemLocator::for_row(model, row);
    for procedure in 0..row.op.procedure_count() {
        let Err(err) = resolve(row, &locator, procedure) else {
            continue;
        };
        let rule = match err {
            ResolveError::NonIntegral(_) | ResolveError::OffGrid { .. } => Rule::NonIntegralParam,
            ResolveError::OutOfRange(_) => Rule::ParamRange,
            ResolveError::Codec(CodecError::ScaleRequired { .. }) => Rule::ScaleRequired,
            ResolveError::Codec(_) => Rule::WidthUnsupported,
            ResolveError::Missing(_) => Rule::MissingParam,
        };
        out.push(Diagnostic::row(rule, model, row, err.to_string()));
        return;
    }
}
