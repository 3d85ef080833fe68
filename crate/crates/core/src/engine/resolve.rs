//! Converts a row's parameters into the numeric domain of its target item.
//!
//! Integer items, and fixed-point reals (whose parameters are divided by the
//! scale), compute on exact 128-bit integers. Native IEEE items compute on
//! doubles. Parameters that do not land on the item's integer grid are
//! rejected instead of silently rounded.

use thiserror::Error;

use super::procedures::Factor;
use crate::codec::{CodecError, Encoding, ItemLocator};
use crate::faultmodel::{Number, OperatorKind, OperatorRow, Param};

/// Parameters of integer-domain procedures must stay within ±2^64.
pub const GRID_PARAM_LIMIT: i128 = 1 << 64;

/// Relative tolerance when mapping a real parameter onto a fixed-point grid.
pub const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("missing parameter {0}")]
    Missing(Param),
    #[error("{0} must be an integer for this item")]
    NonIntegral(Param),
    #[error("{param} = {value} is not a multiple of the item scale {scale}")]
    OffGrid { param: Param, value: f64, scale: f64 },
    #[error("{0} is outside the supported range for this item")]
    OutOfRange(Param),
}

/// One procedure with parameters in domain units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Procedure<N> {
    Vat { t: N, delta: N },
    Vbt { t: N, delta: N },
    Vor { min: N, max: N, delta: N, procedure: u8 },
    /// `min..=max` already intersected with the item's representable range.
    Inv { min: N, max: N },
    Iv { value: N },
    Asa { t: N, delta: N, factor: Factor },
    Ss { delta: N },
    Fvat { t: N, delta: N },
    Fvbt { t: N, delta: N },
    /// `min..=max` already intersected with the item's representable range.
    Fvor { min: N, max: N },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Integer {
        encoding: Encoding,
        procedure: Procedure<i128>,
    },
    Real {
        single: bool,
        procedure: Procedure<f64>,
    },
    BitFlip {
        min: usize,
        max: usize,
        state: Option<bool>,
        count: usize,
    },
    Hold {
        times: u64,
    },
}

fn required(row: &OperatorRow, param: Param) -> Result<Number, ResolveError> {
    row.param(param).ok_or(ResolveError::Missing(param))
}

fn exact_integer(row: &OperatorRow, param: Param) -> Result<i128, ResolveError> {
    required(row, param)?
        .as_integer()
        .ok_or(ResolveError::NonIntegral(param))
}

struct Domain {
    /// `None` for plain integers, the scale for fixed-point items.
    scale: Option<f64>,
}

impl Domain {
    fn grid(&self, row: &OperatorRow, param: Param) -> Result<i128, ResolveError> {
        let number = required(row, param)?;
        let value = match self.scale {
            None => number.as_integer().ok_or(ResolveError::NonIntegral(param))?,
            Some(scale) => {
                let units = number.as_f64() / scale;
                let nearest = units.round();
                if (units - nearest).abs() > GRID_TOLERANCE * nearest.abs().max(1.0) {
                    return Err(ResolveError::OffGrid {
                        param,
                        value: number.as_f64(),
                        scale,
                    });
                }
                if nearest.abs() > GRID_PARAM_LIMIT as f64 {
                    return Err(ResolveError::OutOfRange(param));
                }
                nearest as i128
            }
        };
        if value.abs() > GRID_PARAM_LIMIT {
            return Err(ResolveError::OutOfRange(param));
        }
        Ok(value)
    }

    fn factor(&self, row: &OperatorRow) -> Result<Factor, ResolveError> {
        let number = required(row, Param::Value)?;
        Ok(match number.as_integer() {
            Some(k) if k.abs() < 1 << 63 => Factor::Integer(k),
            _ => Factor::Real(number.as_f64()),
        })
    }
}

fn integer_procedure(
    row: &OperatorRow,
    procedure: u8,
    domain: &Domain,
    bounds: (i128, i128),
) -> Result<Procedure<i128>, ResolveError> {
    use Param::*;
    let g = |param| domain.grid(row, param);
    Ok(match row.op {
        OperatorKind::Vat => Procedure::Vat { t: g(T)?, delta: g(Delta)? },
        OperatorKind::Vbt => Procedure::Vbt { t: g(T)?, delta: g(Delta)? },
        OperatorKind::Fvat => Procedure::Fvat { t: g(T)?, delta: g(Delta)? },
        OperatorKind::Fvbt => Procedure::Fvbt { t: g(T)?, delta: g(Delta)? },
        OperatorKind::Vor => Procedure::Vor {
            min: g(Min)?,
            max: g(Max)?,
            delta: g(Delta)?,
            procedure,
        },
        OperatorKind::Inv => Procedure::Inv {
            min: g(Min)?.max(bounds.0),
            max: g(Max)?.min(bounds.1),
        },
        OperatorKind::Fvor => Procedure::Fvor {
            min: g(Min)?.max(bounds.0),
            max: g(Max)?.min(bounds.1),
        },
        OperatorKind::Iv => Procedure::Iv { value: g(Value)? },
        OperatorKind::Asa => Procedure::Asa {
            t: g(T)?,
            delta: g(Delta)?,
            factor: domain.factor(row)?,
        },
        OperatorKind::Ss => Procedure::Ss { delta: g(Delta)? },
        OperatorKind::Bf | OperatorKind::Hv => unreachable!("handled by resolve"),
    })
}

fn real_procedure(row: &OperatorRow, procedure: u8) -> Result<Procedure<f64>, ResolveError> {
    use Param::*;
    let r = |param| required(row, param).map(Number::as_f64);
    Ok(match row.op {
        OperatorKind::Vat => Procedure::Vat { t: r(T)?, delta: r(Delta)? },
        OperatorKind::Vbt => Procedure::Vbt { t: r(T)?, delta: r(Delta)? },
        OperatorKind::Fvat => Procedure::Fvat { t: r(T)?, delta: r(Delta)? },
        OperatorKind::Fvbt => Procedure::Fvbt { t: r(T)?, delta: r(Delta)? },
        OperatorKind::Vor => Procedure::Vor {
            min: r(Min)?,
            max: r(Max)?,
            delta: r(Delta)?,
            procedure,
        },
        OperatorKind::Inv => Procedure::Inv { min: r(Min)?, max: r(Max)? },
        OperatorKind::Fvor => Procedure::Fvor { min: r(Min)?, max: r(Max)? },
        OperatorKind::Iv => Procedure::Iv { value: r(Value)? },
        OperatorKind::Asa => Procedure::Asa {
            t: r(T)?,
            delta: r(Delta)?,
            factor: Factor::Real(r(Value)?),
        },
        OperatorKind::Ss => Procedure::Ss { delta: r(Delta)? },
        OperatorKind::Bf | OperatorKind::Hv => unreachable!("handled by resolve"),
    })
}

pub fn resolve(
    row: &OperatorRow,
    locator: &ItemLocator,
    procedure: u8,
) -> Result<Resolved, ResolveError> {
    let encoding = locator.encoding()?;
    match row.op {
        OperatorKind::Bf => {
            let min = exact_integer(row, Param::Min)?;
            let max = exact_integer(row, Param::Max)?;
            let count = exact_integer(row, Param::Value)?;
            let bits = locator.byte_width() as i128 * 8;
            if min < 0 || max >= bits || min > max {
                return Err(ResolveError::OutOfRange(Param::Min));
            }
            if count < 1 || count > max - min + 1 {
                return Err(ResolveError::OutOfRange(Param::Value));
            }
            let state = match row.state.ok_or(ResolveError::Missing(Param::State))? {
                -1 => None,
                0 => Some(false),
                1 => Some(true),
                _ => return Err(ResolveError::OutOfRange(Param::State)),
            };
            return Ok(Resolved::BitFlip {
                min: min as usize,
                max: max as usize,
                state,
                count: count as usize,
            });
        }
        OperatorKind::Hv => {
            let times = exact_integer(row, Param::Value)?;
            if !(1..=i128::from(u64::MAX)).contains(&times) {
                return Err(ResolveError::OutOfRange(Param::Value));
            }
            return Ok(Resolved::Hold { times: times as u64 });
        }
        _ => {}
    }
    match encoding {
        Encoding::Ieee32 | Encoding::Ieee64 => Ok(Resolved::Real {
            single: encoding == Encoding::Ieee32,
            procedure: real_procedure(row, procedure)?,
        }),
        Encoding::Signed { .. } | Encoding::Unsigned { .. } | Encoding::FixedPoint { .. } => {
            let scale = match encoding {
                Encoding::FixedPoint { scale, .. } => Some(scale),
                _ => None,
            };
            let bounds = encoding.integer_bounds().expect("integer-backed encoding");
            Ok(Resolved::Integer {
                encoding,
                procedure: integer_procedure(row, procedure, &Domain { scale }, bounds)?,
            })
        }
        Encoding::Bits { .. } => Err(CodecError::TypeMismatch { rep: row.rep }.into()),
    }
}
