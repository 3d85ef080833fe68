//! The mutation procedures, as functions from an observed value to a new value.
//!
//! Each function reports whether its guard held. Whether the mutation was
//! *applied* is decided later, by comparing encoded bytes.

use std::fmt::Debug;

use crate::codec::{bit_flip, bit_get};
use crate::faultmodel::Endianness;
use crate::rng::SplitMix64;

/// Saturation bound for amplified integer differences.
pub const AMPLIFY_LIMIT: i128 = 1 << 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub guard: bool,
}

impl<T> Outcome<T> {
    pub fn keep(value: T) -> Self {
        Self { value, guard: false }
    }

    pub fn replace(value: T) -> Self {
        Self { value, guard: true }
    }
}

impl<T: PartialEq> Outcome<T> {
    pub fn changes(&self, original: &T) -> bool {
        self.guard && self.value != *original
    }
}

/// ASA amplification factor, kept exact when integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Integer(i128),
    Real(f64),
}

impl Factor {
    pub fn as_f64(self) -> f64 {
        match self {
            Factor::Integer(k) => k as f64,
            Factor::Real(x) => x,
        }
    }
}

/// Arithmetic needed by the threshold and range procedures.
pub trait Numeric: Copy + PartialOrd + Debug {
    fn plus(self, other: Self) -> Self;
    fn minus(self, other: Self) -> Self;
    /// `self × factor` for a non-negative difference `self`.
    fn amplify(self, factor: Factor) -> Self;
}

impl Numeric for i128 {
    fn plus(self, other: Self) -> Self {
        self.saturating_add(other)
    }

    fn minus(self, other: Self) -> Self {
        self.saturating_sub(other)
    }

    fn amplify(self, factor: Factor) -> Self {
        match factor {
            Factor::Integer(k) => {
                if self == 0 || k == 0 {
                    0
                } else if self > AMPLIFY_LIMIT / k.abs() {
                    AMPLIFY_LIMIT * k.signum()
                } else {
                    self * k
                }
            }
            Factor::Real(x) => {
                let limit = AMPLIFY_LIMIT as f64;
                (self as f64 * x).round().clamp(-limit, limit) as i128
            }
        }
    }
}

impl Numeric for f64 {
    fn plus(self, other: Self) -> Self {
        self + other
    }

    fn minus(self, other: Self) -> Self {
        self - other
    }

    fn amplify(self, factor: Factor) -> Self {
        self * factor.as_f64()
    }
}

pub fn vat<N: Numeric>(v: N, t: N, delta: N) -> Outcome<N> {
    if v <= t {
        Outcome::replace(t.plus(delta))
    } else {
        Outcome::keep(v)
    }
}

pub fn vbt<N: Numeric>(v: N, t: N, delta: N) -> Outcome<N> {
    if v >= t {
        Outcome::replace(t.minus(delta))
    } else {
        Outcome::keep(v)
    }
}

/// Procedure 0 moves in-range values below MIN, procedure 1 above MAX.
pub fn vor<N: Numeric>(v: N, min: N, max: N, delta: N, procedure: u8) -> Outcome<N> {
    if min <= v && v <= max {
        Outcome::replace(if procedure == 0 {
            min.minus(delta)
        } else {
            max.plus(delta)
        })
    } else {
        Outcome::keep(v)
    }
}

pub fn iv<N: Numeric>(v: N, value: N) -> Outcome<N> {
    if v != value {
        Outcome::replace(value)
    } else {
        Outcome::keep(v)
    }
}

pub fn asa<N: Numeric>(v: N, t: N, delta: N, factor: Factor) -> Outcome<N> {
    let value = if v >= t {
        t.plus(v.minus(t).amplify(factor)).plus(delta)
    } else {
        t.minus(t.minus(v).amplify(factor)).minus(delta)
    };
    Outcome::replace(value)
}

pub fn ss<N: Numeric>(v: N, delta: N) -> Outcome<N> {
    Outcome::replace(v.plus(delta))
}

pub fn fvat<N: Numeric>(v: N, t: N, delta: N) -> Outcome<N> {
    if v > t {
        Outcome::replace(t.minus(delta))
    } else {
        Outcome::keep(v)
    }
}

pub fn fvbt<N: Numeric>(v: N, t: N, delta: N) -> Outcome<N> {
    if v < t {
        Outcome::replace(t.plus(delta))
    } else {
        Outcome::keep(v)
    }
}

/// Uniform draw from the integers of `[lo, hi]` other than `v`.
pub fn inv_integer(v: i128, lo: i128, hi: i128, rng: &mut SplitMix64) -> Outcome<i128> {
    if lo > hi {
        return Outcome::keep(v);
    }
    let n = (hi - lo + 1) as u128;
    if lo <= v && v <= hi {
        if n == 1 {
            return Outcome::keep(v);
        }
        let r = lo + rng.below(n - 1) as i128;
        Outcome::replace(if r >= v { r + 1 } else { r })
    } else {
        Outcome::replace(lo + rng.below(n) as i128)
    }
}

pub fn fvor_integer(v: i128, lo: i128, hi: i128, rng: &mut SplitMix64) -> Outcome<i128> {
    if (lo <= v && v <= hi) || lo > hi {
        return Outcome::keep(v);
    }
    Outcome::replace(lo + rng.below((hi - lo + 1) as u128) as i128)
}

/// Rounds to the precision the value will be stored in.
pub fn stored(x: f64, single: bool) -> f64 {
    if single {
        f64::from(x as f32)
    } else {
        x
    }
}

fn draw_real(min: f64, max: f64, rng: &mut SplitMix64) -> f64 {
    if min == max {
        return min;
    }
    (min + rng.unit() * (max - min)).clamp(min, max)
}

/// Maximum redraws when looking for a real distinct from the current value.
pub const INV_REAL_ATTEMPTS: u32 = 64;

/// Uniform draw from `[min, max]`, redrawn until it differs from `v` once stored.
pub fn inv_real(v: f64, min: f64, max: f64, single: bool, rng: &mut SplitMix64) -> Outcome<f64> {
    if min > max {
        return Outcome::keep(v);
    }
    let current = stored(v, single);
    if min == max {
        return if stored(min, single) != current {
            Outcome::replace(min)
        } else {
            Outcome::keep(v)
        };
    }
    for _ in 0..INV_REAL_ATTEMPTS {
        let r = draw_real(min, max, rng);
        if stored(r, single) != current {
            return Outcome::replace(r);
        }
    }
    Outcome::keep(v)
}

pub fn fvor_real(v: f64, min: f64, max: f64, rng: &mut SplitMix64) -> Outcome<f64> {
    if v < min || v > max {
        Outcome::replace(draw_real(min, max, rng))
    } else {
        Outcome::keep(v)
    }
}

/// Latch state of one HV operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldState<T> {
    held: Option<T>,
    counter: u64,
}

impl<T> Default for HoldState<T> {
    fn default() -> Self {
        Self {
            held: None,
            counter: 0,
        }
    }
}

impl<T> HoldState<T> {
    pub fn held(&self) -> Option<&T> {
        self.held.as_ref()
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }
}

/// The first observation is latched and passed through; the next `times − 1`
/// observations are replaced by it; then the next observation is latched.
pub fn hv<T: Clone>(state: &mut HoldState<T>, v: T, times: u64) -> Outcome<T> {
    match &state.held {
        Some(held) if state.counter < times => {
            state.counter += 1;
            Outcome::replace(held.clone())
        }
        _ => {
            state.held = Some(v.clone());
            state.counter = 1;
            Outcome::keep(v)
        }
    }
}

/// Flips `count` distinct bits chosen among positions `min..=max` whose
/// state matches `state` (any state when `None`).
pub fn bf(
    bits: &[u8],
    endianness: Endianness,
    min: usize,
    max: usize,
    state: Option<bool>,
    count: usize,
    rng: &mut SplitMix64,
) -> Outcome<Vec<u8>> {
    let width_bits = bits.len() * 8;
    let mut eligible: Vec<usize> = (min..=max.min(width_bits.saturating_sub(1)))
        .filter(|&i| state.is_none_or(|s| bit_get(bits, i, endianness) == Ok(s)))
        .collect();
    if count == 0 || eligible.len() < count {
        return Outcome::keep(bits.to_vec());
    }
    let len = eligible.len();
    for i in 0..count {
        let j = i + rng.below((len - i) as u128) as usize;
        eligible.swap(i, j);
    }
    let mut out = bits.to_vec();
    for &index in &eligible[..count] {
        bit_flip(&mut out, index, endianness).expect("eligible bits are in range");
    }
    Outcome::replace(out)
}
