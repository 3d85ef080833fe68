//! Reading and writing data-item instances inside raw message buffers.
//!
//! An item is located by unit position and span; its bytes are interpreted
//! according to the representation type:
//!
//! * `INT`/`LONG`: two's-complement signed integer of the item width.
//! * `HEX`: unsigned integer of the item width.
//! * `FLOAT` of width 4 and `DOUBLE` of width 8: IEEE-754 single/double.
//! * `FLOAT`/`DOUBLE` of any other width: signed fixed-point, the value is
//!   the raw integer times the item's scale.
//! * `BIN`: the raw bytes.
//!
//! Bits of a `BIN` item are numbered LSB-0 over the integer the item bytes
//! form under the model's byte order, so bit 0 of a little-endian item is the
//! low bit of its first byte.

use std::ops::Range;

use thiserror::Error;

use crate::faultmodel::{Endianness, FaultModel, OperatorRow, RepresentationType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("bytes {range:?} are outside a {len}-byte buffer")]
    OutOfBounds { range: Range<usize>, len: usize },
    #[error("bit {index} is outside a {width_bits}-bit item")]
    BitOutOfBounds { index: usize, width_bits: usize },
    #[error("{rep} item of {width} bytes needs a fixed-point scale")]
    ScaleRequired { rep: RepresentationType, width: usize },
    #[error("{rep} items wider than 8 bytes are not supported (got {width})")]
    UnsupportedWidth { rep: RepresentationType, width: usize },
    #[error("value {value} is not representable in this {width}-byte {rep} item")]
    Overflow {
        value: String,
        rep: RepresentationType,
        width: usize,
    },
    #[error("value kind does not match the item's {rep} representation")]
    TypeMismatch { rep: RepresentationType },
}

/// Where an item lives in a buffer and how to read it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemLocator {
    pub position: usize,
    pub span: usize,
    pub unit_size: usize,
    pub rep: RepresentationType,
    pub endianness: Endianness,
    pub scale: Option<f64>,
}

/// Concrete storage format derived from a locator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Encoding {
    Signed { width: usize },
    Unsigned { width: usize },
    Ieee32,
    Ieee64,
    FixedPoint { width: usize, scale: f64 },
    Bits { width: usize },
}

impl Encoding {
    /// Inclusive bounds of the underlying integer, for integer-backed encodings.
    pub fn integer_bounds(self) -> Option<(i128, i128)> {
        match self {
            Encoding::Signed { width } | Encoding::FixedPoint { width, .. } => {
                let bits = (width * 8) as u32;
                Some((-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1))
            }
            Encoding::Unsigned { width } => Some((0, (1i128 << (width * 8)) - 1)),
            _ => None,
        }
    }
}

impl ItemLocator {
    pub fn for_row(model: &FaultModel, row: &OperatorRow) -> Self {
        Self {
            position: row.position,
            span: row.span,
            unit_size: model.unit_size,
            rep: row.rep,
            endianness: model.endianness,
            scale: row.scale,
        }
    }

    pub fn byte_offset(&self) -> usize {
        self.position * self.unit_size
    }

    pub fn byte_width(&self) -> usize {
        self.span * self.unit_size
    }

    pub fn byte_range(&self) -> Range<usize> {
        self.byte_offset()..self.byte_offset() + self.byte_width()
    }

    pub fn encoding(&self) -> Result<Encoding, CodecError> {
        let width = self.byte_width();
        let unsupported = || CodecError::UnsupportedWidth {
            rep: self.rep,
            width,
        };
        match self.rep {
            RepresentationType::Bin => Ok(Encoding::Bits { width }),
            RepresentationType::Int | RepresentationType::Long | RepresentationType::Hex => {
                if !(1..=8).contains(&width) {
                    return Err(unsupported());
                }
                if self.rep == RepresentationType::Hex {
                    Ok(Encoding::Unsigned { width })
                } else {
                    Ok(Encoding::Signed { width })
                }
            }
            RepresentationType::Float if width == 4 => Ok(Encoding::Ieee32),
            RepresentationType::Double if width == 8 => Ok(Encoding::Ieee64),
            RepresentationType::Float | RepresentationType::Double => {
                if !(1..=8).contains(&width) {
                    return Err(unsupported());
                }
                let scale = self.scale.ok_or(CodecError::ScaleRequired {
                    rep: self.rep,
                    width,
                })?;
                Ok(Encoding::FixedPoint { width, scale })
            }
        }
    }

    fn slice<'b>(&self, buffer: &'b [u8]) -> Result<&'b [u8], CodecError> {
        buffer
            .get(self.byte_range())
            .ok_or_else(|| CodecError::OutOfBounds {
                range: self.byte_range(),
                len: buffer.len(),
            })
    }

    fn slice_mut<'b>(&self, buffer: &'b mut [u8]) -> Result<&'b mut [u8], CodecError> {
        let len = buffer.len();
        buffer
            .get_mut(self.byte_range())
            .ok_or_else(|| CodecError::OutOfBounds {
                range: self.byte_range(),
                len,
            })
    }
}

/// A decoded item instance.
#[derive(Debug, Clone, PartialEq)]
pub enum ItemValue {
    Integer(i128),
    Real(f64),
    Bits(Vec<u8>),
}

/// Reads `bytes` as an unsigned integer under the given byte order.
pub fn read_unsigned(bytes: &[u8], endianness: Endianness) -> u64 {
    let fold = |acc: u64, b: &u8| (acc << 8) | u64::from(*b);
    match endianness {
        Endianness::Big => bytes.iter().fold(0, fold),
        Endianness::Little => bytes.iter().rev().fold(0, fold),
    }
}

/// Writes the low `bytes.len()` bytes of `value` under the given byte order.
pub fn write_unsigned(bytes: &mut [u8], value: u64, endianness: Endianness) {
    let width = bytes.len();
    for i in 0..width {
        let byte = (value >> (8 * i)) as u8;
        match endianness {
            Endianness::Little => bytes[i] = byte,
            Endianness::Big => bytes[width - 1 - i] = byte,
        }
    }
}

fn sign_extend(raw: u64, width: usize) -> i128 {
    let bits = width * 8;
    if bits == 64 {
        return i128::from(raw as i64);
    }
    let raw = i128::from(raw);
    if raw & (1 << (bits - 1)) != 0 {
        raw - (1 << bits)
    } else {
        raw
    }
}

/// Reads the integer behind an integer-backed encoding (fixed-point yields the raw value).
pub fn read_integer(bytes: &[u8], encoding: Encoding, endianness: Endianness) -> i128 {
    let raw = read_unsigned(bytes, endianness);
    match encoding {
        Encoding::Unsigned { .. } => i128::from(raw),
        _ => sign_extend(raw, bytes.len()),
    }
}

/// Writes an integer already known to fit the encoding's bounds.
pub fn write_integer(bytes: &mut [u8], value: i128, endianness: Endianness) {
    write_unsigned(bytes, value as u64, endianness);
}

pub fn read_f32(bytes: &[u8], endianness: Endianness) -> f32 {
    f32::from_bits(read_unsigned(bytes, endianness) as u32)
}

pub fn read_f64(bytes: &[u8], endianness: Endianness) -> f64 {
    f64::from_bits(read_unsigned(bytes, endianness))
}

pub fn decode(buffer: &[u8], loc: &ItemLocator) -> Result<ItemValue, CodecError> {
    let encoding = loc.encoding()?;
    let bytes = loc.slice(buffer)?;
    Ok(match encoding {
        Encoding::Bits { .. } => ItemValue::Bits(bytes.to_vec()),
        Encoding::Ieee32 => ItemValue::Real(f64::from(read_f32(bytes, loc.endianness))),
        Encoding::Ieee64 => ItemValue::Real(read_f64(bytes, loc.endianness)),
        Encoding::FixedPoint { scale, .. } => {
            ItemValue::Real(read_integer(bytes, encoding, loc.endianness) as f64 * scale)
        }
        Encoding::Signed { .. } | Encoding::Unsigned { .. } => {
            ItemValue::Integer(read_integer(bytes, encoding, loc.endianness))
        }
    })
}

/// Writes `value` into the item's byte range; bytes outside it are untouched.
pub fn encode(value: &ItemValue, loc: &ItemLocator, buffer: &mut [u8]) -> Result<(), CodecError> {
    let encoding = loc.encoding()?;
    let width = loc.byte_width();
    let overflow = |shown: String| CodecError::Overflow {
        value: shown,
        rep: loc.rep,
        width,
    };
    let mismatch = CodecError::TypeMismatch { rep: loc.rep };
    let bytes = loc.slice_mut(buffer)?;
    match (encoding, value) {
        (Encoding::Bits { .. }, ItemValue::Bits(bits)) => {
            if bits.len() != width {
                return Err(mismatch);
            }
            bytes.copy_from_slice(bits);
        }
        (Encoding::Ieee32, ItemValue::Real(x)) => {
            let single = *x as f32;
            if x.is_finite() && !single.is_finite() {
                return Err(overflow(x.to_string()));
            }
            write_unsigned(bytes, u64::from(single.to_bits()), loc.endianness);
        }
        (Encoding::Ieee64, ItemValue::Real(x)) => {
            write_unsigned(bytes, x.to_bits(), loc.endianness);
        }
        (Encoding::FixedPoint { scale, .. }, ItemValue::Real(x)) => {
            let (lo, hi) = encoding.integer_bounds().expect("fixed point is integer-backed");
            let quantized = (x / scale).round();
            if !quantized.is_finite() || quantized < lo as f64 || quantized > hi as f64 {
                return Err(overflow(x.to_string()));
            }
            write_integer(bytes, quantized as i128, loc.endianness);
        }
        (Encoding::Signed { .. } | Encoding::Unsigned { .. }, ItemValue::Integer(i)) => {
            let (lo, hi) = encoding.integer_bounds().expect("integer encoding");
            if *i < lo || *i > hi {
                return Err(overflow(i.to_string()));
            }
            write_integer(bytes, *i, loc.endianness);
        }
        _ => return Err(mismatch),
    }
    Ok(())
}

fn bit_address(
    width: usize,
    index: usize,
    endianness: Endianness,
) -> Result<(usize, u8), CodecError> {
    if index >= width * 8 {
        return Err(CodecError::BitOutOfBounds {
            index,
            width_bits: width * 8,
        });
    }
    let byte = match endianness {
        Endianness::Little => index / 8,
        Endianness::Big => width - 1 - index / 8,
    };
    Ok((byte, 1 << (index % 8)))
}

pub fn bit_get(bits: &[u8], index: usize, endianness: Endianness) -> Result<bool, CodecError> {
    let (byte, mask) = bit_address(bits.len(), index, endianness)?;
    Ok(bits[byte] & mask != 0)
}

pub fn bit_set(
    bits: &mut [u8],
    index: usize,
    state: bool,
    endianness: Endianness,
) -> Result<(), CodecError> {
    let (byte, mask) = bit_address(bits.len(), index, endianness)?;
    if state {
        bits[byte] |= mask;
    } else {
        bits[byte] &= !mask;
    }
    Ok(())
}

pub fn bit_flip(bits: &mut [u8], index: usize, endianness: Endianness) -> Result<(), CodecError> {
    let (byte, mask) = bit_address(bits.len(), index, endianness)?;
    bits[byte] ^= mask;
    Ok(())
}
