//! Operator selection guidelines, keyed by the nature of a data item.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{OperatorKind, RepresentationType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Nature {
    Numerical,
    Categorical,
    Ordinal,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Dependency {
    Stateless,
    Stateful,
    Signal,
    #[serde(rename = "N/A")]
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataItemProfile {
    pub nature: Nature,
    pub rep: RepresentationType,
    pub dependency: Dependency,
    pub partitions: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Times(u32),
    /// One instance per category value of the item.
    PerCategory,
    /// Two instances per bit, one with STATE=0 and one with STATE=1.
    TwicePerBit,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Times(n) => write!(f, "x{n}"),
            Multiplicity::PerCategory => f.write_str("x1 per category"),
            Multiplicity::TwicePerBit => f.write_str("x2 per bit (STATE=0, STATE=1)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub operator: OperatorKind,
    pub multiplicity: Multiplicity,
    pub purpose: String,
}

/// `required` operators apply in every case; from `alternatives` the author picks one set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Advice {
    pub required: Vec<Suggestion>,
    pub alternatives: Vec<Vec<Suggestion>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdviseError {
    #[error("no guideline for {nature:?} data represented as {rep}")]
    UnsupportedCombination {
        nature: Nature,
        rep: RepresentationType,
    },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

fn suggest(operator: OperatorKind, multiplicity: Multiplicity, purpose: &str) -> Suggestion {
    Suggestion {
        operator,
        multiplicity,
        purpose: purpose.to_string(),
    }
}

fn once(operator: OperatorKind, purpose: &str) -> Suggestion {
    suggest(operator, Multiplicity::Times(1), purpose)
}

pub fn advise_operators(profile: &DataItemProfile) -> Result<Advice, AdviseError> {
    use OperatorKind::*;
    use RepresentationType as R;

    let unsupported = || AdviseError::UnsupportedCombination {
        nature: profile.nature,
        rep: profile.rep,
    };
    let needs_partitions = profile.nature == Nature::Numerical
        && matches!(profile.dependency, Dependency::Stateless | Dependency::Stateful);
    match (needs_partitions, profile.partitions) {
        (true, None) => {
            return Err(AdviseError::InvalidProfile(
                "numerical stateless/stateful items need a partition count".into(),
            ))
        }
        (true, Some(n)) if n < 2 => {
            return Err(AdviseError::InvalidProfile(format!(
                "at least 2 input partitions are needed, got {n}"
            )))
        }
        (false, Some(_)) => {
            return Err(AdviseError::InvalidProfile(
                "partitions only apply to numerical stateless/stateful items".into(),
            ))
        }
        _ => {}
    }
    let numerical = profile.nature == Nature::Numerical;
    if numerical == (profile.dependency == Dependency::NotApplicable) {
        return Err(AdviseError::InvalidProfile(
            "dependency is required for numerical items and N/A otherwise".into(),
        ));
    }

    let mut advice = Advice::default();
    match profile.nature {
        Nature::Numerical => {
            if !matches!(profile.rep, R::Int | R::Long | R::Float | R::Double) {
                return Err(unsupported());
            }
            match (profile.dependency, profile.partitions) {
                (Dependency::Signal, _) => {
                    advice.alternatives = [Asa, Ss, Hv]
                        .into_iter()
                        .map(|op| vec![once(op, "signal distortion")])
                        .collect();
                }
                (_, Some(2)) => {
                    advice.alternatives = vec![
                        vec![once(Vat, "nominal below T"), once(Fvat, "nominal below T")],
                        vec![once(Vbt, "nominal above T"), once(Fvbt, "nominal above T")],
                    ];
                }
                (_, Some(n)) => {
                    let pairs = Multiplicity::Times(n - 2);
                    advice.required.push(suggest(Vor, pairs, "one pair per partition boundary"));
                    advice.required.push(suggest(Fvor, pairs, "one pair per partition boundary"));
                }
                (_, None) => unreachable!("partitions checked above"),
            }
            if profile.dependency == Dependency::Stateful {
                advice.required.push(once(Inv, "for valid range"));
                advice.required.push(once(Vor, "for out of range"));
                advice.required.push(once(Fvor, "for out of range"));
            }
        }
        Nature::Categorical => match profile.rep {
            R::Int | R::Hex => advice
                .required
                .push(suggest(Iv, Multiplicity::PerCategory, "one per category value")),
            R::Bin => advice
                .required
                .push(suggest(Bf, Multiplicity::TwicePerBit, "one per bit and state")),
            _ => return Err(unsupported()),
        },
        Nature::Ordinal => match profile.rep {
            R::Int | R::Hex => advice.required.push(once(Asa, "shift the ordinal value")),
            _ => return Err(unsupported()),
        },
        Nature::Other => match profile.rep {
            R::Bin => advice.required.push(once(Bf, "flip bits")),
            _ => return Err(unsupported()),
        },
    }
    Ok(advice)
}
