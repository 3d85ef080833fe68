use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// How the bytes of a data item are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RepresentationType {
    Int,
    Long,
    Float,
    Double,
    Bin,
    Hex,
}

impl RepresentationType {
    pub const ALL: [RepresentationType; 6] = [
        Self::Int,
        Self::Long,
        Self::Float,
        Self::Double,
        Self::Bin,
        Self::Hex,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Int => "INT",
            Self::Long => "LONG",
            Self::Float => "FLOAT",
            Self::Double => "DOUBLE",
            Self::Bin => "BIN",
            Self::Hex => "HEX",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Self::Int | Self::Long | Self::Hex)
    }

    pub fn is_real(self) -> bool {
        matches!(self, Self::Float | Self::Double)
    }
}

impl fmt::Display for RepresentationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|rep| rep.as_str() == upper)
            .ok_or(())
    }
}

/// The twelve data-driven mutation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OperatorKind {
    /// Value above threshold.
    Vat,
    /// Value below threshold.
    Vbt,
    /// Value out of range (two procedures).
    Vor,
    /// Bit flip.
    Bf,
    /// Invalid numeric value: legal but different.
    Inv,
    /// Illegal value.
    Iv,
    /// Anomalous signal amplitude.
    Asa,
    /// Signal shift.
    Ss,
    /// Hold value.
    Hv,
    /// Fix value above threshold.
    Fvat,
    /// Fix value below threshold.
    Fvbt,
    /// Fix value out of range.
    Fvor,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 12] = [
        Self::Vat,
        Self::Vbt,
        Self::Vor,
        Self::Bf,
        Self::Inv,
        Self::Iv,
        Self::Asa,
        Self::Ss,
        Self::Hv,
        Self::Fvat,
        Self::Fvbt,
        Self::Fvor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Vat => "VAT",
            Self::Vbt => "VBT",
            Self::Vor => "VOR",
            Self::Bf => "BF",
            Self::Inv => "INV",
            Self::Iv => "IV",
            Self::Asa => "ASA",
            Self::Ss => "SS",
            Self::Hv => "HV",
            Self::Fvat => "FVAT",
            Self::Fvbt => "FVBT",
            Self::Fvor => "FVOR",
        }
    }

    /// Number of mutation procedures the operator contributes.
    pub fn procedure_count(self) -> u8 {
        match self {
            Self::Vor => 2,
            _ => 1,
        }
    }

    /// Parameters that must be present for a row using this operator.
    pub fn required_params(self) -> &'static [Param] {
        use Param::*;
        match self {
            Self::Vat | Self::Vbt | Self::Fvat | Self::Fvbt => &[T, Delta],
            Self::Vor => &[Min, Max, Delta],
            Self::Fvor | Self::Inv => &[Min, Max],
            Self::Bf => &[Min, Max, State, Value],
            Self::Iv => &[Value],
            Self::Asa => &[T, Delta, Value],
            Self::Ss => &[Delta],
            Self::Hv => &[Value],
        }
    }

    /// Whether the operator may target an item of the given representation.
    pub fn accepts(self, rep: RepresentationType) -> bool {
        match self {
            Self::Bf => rep == RepresentationType::Bin,
            _ => rep != RepresentationType::Bin,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        Self::ALL.into_iter().find(|op| op.as_str() == upper).ok_or(())
    }
}

/// Parameter columns of the tabular format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Min,
    Max,
    T,
    Delta,
    State,
    Value,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Self::Min,
        Self::Max,
        Self::T,
        Self::Delta,
        Self::State,
        Self::Value,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Self::Min => "MIN",
            Self::Max => "MAX",
            Self::T => "T",
            Self::Delta => "DELTA",
            Self::State => "STATE",
            Self::Value => "VALUE",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

impl Endianness {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Little => "little",
            Self::Big => "big",
        }
    }
}

impl fmt::Display for Endianness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Endianness {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "little" | "le" => Ok(Self::Little),
            "big" | "be" => Ok(Self::Big),
            _ => Err(()),
        }
    }
}

/// A numeric parameter literal.
///
/// Integer literals (decimal, or `0x` hexadecimal where allowed) are kept
/// exact so that 64-bit identifiers survive parsing; everything else is a
/// double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Integer(i128),
    Real(f64),
}

/// Magnitude bound for integer parameters; comfortably above any 64-bit item.
pub(crate) const INTEGER_PARAM_LIMIT: i128 = 1 << 100;

impl Number {
    pub fn parse(text: &str, allow_hex: bool) -> Option<Number> {
        let text = text.trim();
        if text.is_empty() {
            return None;
        }
        let (negative, body) = match text.as_bytes()[0] {
            b'-' => (true, &text[1..]),
            b'+' => (false, &text[1..]),
            _ => (false, text),
        };
        if let Some(digits) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
            if !allow_hex || digits.is_empty() {
                return None;
            }
            let magnitude = i128::from_str_radix(digits, 16).ok()?;
            if magnitude > INTEGER_PARAM_LIMIT {
                return None;
            }
            return Some(Number::Integer(if negative { -magnitude } else { magnitude }));
        }
        if !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(magnitude) = body.parse::<i128>() {
                if magnitude <= INTEGER_PARAM_LIMIT {
                    return Some(Number::Integer(if negative { -magnitude } else { magnitude }));
                }
            }
        }
        let value: f64 = text.parse().ok()?;
        value.is_finite().then_some(Number::Real(value))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Number::Integer(i) => i as f64,
            Number::Real(x) => x,
        }
    }

    /// The exact integer value, if the number is integral.
    pub fn as_integer(self) -> Option<i128> {
        match self {
            Number::Integer(i) => Some(i),
            Number::Real(x) if x.fract() == 0.0 && x.abs() <= INTEGER_PARAM_LIMIT as f64 => {
                Some(x as i128)
            }
            Number::Real(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        match self {
            Number::Integer(_) => true,
            Number::Real(x) => x.is_finite(),
        }
    }

    /// Numeric comparison, exact when both sides are integers.
    pub fn value_cmp(self, other: Number) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Number::Integer(a), Number::Integer(b)) => Some(a.cmp(&b)),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Integer(i) => write!(f, "{i}"),
            // Debug keeps a fractional marker ("24.0"), so reparsing yields a Real.
            Number::Real(x) => write!(f, "{x:?}"),
        }
    }
}

/// One configured operator: a row of the fault-model table.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRow {
    /// 1-based ordinal of the data row in the fault-model CSV.
    pub row_index: usize,
    pub fault_model: String,
    /// Unit index of the first unit of the item.
    pub position: usize,
    /// Number of units the item covers.
    pub span: usize,
    pub rep: RepresentationType,
    pub op: OperatorKind,
    pub min: Option<Number>,
    pub max: Option<Number>,
    pub threshold: Option<Number>,
    pub delta: Option<Number>,
    pub state: Option<i64>,
    pub value: Option<Number>,
    /// Fixed-point scale for real items with a non-native width.
    pub scale: Option<f64>,
}

impl OperatorRow {
    pub fn param(&self, param: Param) -> Option<Number> {
        match param {
            Param::Min => self.min,
            Param::Max => self.max,
            Param::T => self.threshold,
            Param::Delta => self.delta,
            Param::State => self.state.map(|s| Number::Integer(s as i128)),
            Param::Value => self.value,
        }
    }

    pub fn clear_param(&mut self, param: Param) {
        match param {
            Param::Min => self.min = None,
            Param::Max => self.max = None,
            Param::T => self.threshold = None,
            Param::Delta => self.delta = None,
            Param::State => self.state = None,
            Param::Value => self.value = None,
        }
    }

    pub fn missing_params(&self) -> impl Iterator<Item = Param> + '_ {
        self.op
            .required_params()
            .iter()
            .copied()
            .filter(|p| self.param(*p).is_none())
    }
}

/// The fault model of one message type.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultModel {
    pub name: String,
    /// Bytes per buffer unit.
    pub unit_size: usize,
    /// Units per buffer.
    pub buffer_size: usize,
    pub endianness: Endianness,
    pub rows: Vec<OperatorRow>,
}

impl FaultModel {
    pub fn buffer_len(&self) -> usize {
        self.unit_size * self.buffer_size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultModelSpec {
    pub models: Vec<FaultModel>,
    pub source_path: String,
    pub global_seed: u64,
}

impl FaultModelSpec {
    pub fn model(&self, name: &str) -> Option<&FaultModel> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&FaultModel, &OperatorRow)> {
        self.models
            .iter()
            .flat_map(|m| m.rows.iter().map(move |r| (m, r)))
    }

    pub fn row_count(&self) -> usize {
        self.models.iter().map(|m| m.rows.len()).sum()
    }
}
