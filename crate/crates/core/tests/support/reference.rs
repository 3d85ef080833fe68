//! Straight-line reference procedures, written against the operator table
//! rather than against the engine's code.

use damut_core::rng::SplitMix64;

/// Integer-domain operator with parameters in item units.
#[derive(Debug, Clone, Copy)]
pub enum IntOp {
    Vat { t: i64, d: i64 },
    Vbt { t: i64, d: i64 },
    Fvat { t: i64, d: i64 },
    Fvbt { t: i64, d: i64 },
    Vor { min: i64, max: i64, d: i64 },
    Iv { value: i64 },
    Asa { t: i64, d: i64, k: i64 },
    Ss { d: i64 },
    Inv { min: i64, max: i64 },
    Fvor { min: i64, max: i64 },
}

fn cell(x: Option<i64>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

impl IntOp {
    pub fn name(&self) -> &'static str {
        match self {
            IntOp::Vat { .. } => "VAT",
            IntOp::Vbt { .. } => "VBT",
            IntOp::Fvat { .. } => "FVAT",
            IntOp::Fvbt { .. } => "FVBT",
            IntOp::Vor { .. } => "VOR",
            IntOp::Iv { .. } => "IV",
            IntOp::Asa { .. } => "ASA",
            IntOp::Ss { .. } => "SS",
            IntOp::Inv { .. } => "INV",
            IntOp::Fvor { .. } => "FVOR",
        }
    }

    /// MIN, MAX, T, DELTA, STATE, VALUE cells.
    pub fn cells(&self) -> String {
        let (min, max, t, d, value) = match *self {
            IntOp::Vat { t, d } | IntOp::Vbt { t, d } | IntOp::Fvat { t, d } | IntOp::Fvbt { t, d } => {
                (None, None, Some(t), Some(d), None)
            }
            IntOp::Vor { min, max, d } => (Some(min), Some(max), None, Some(d), None),
            IntOp::Iv { value } => (None, None, None, None, Some(value)),
            IntOp::Asa { t, d, k } => (None, None, Some(t), Some(d), Some(k)),
            IntOp::Ss { d } => (None, None, None, Some(d), None),
            IntOp::Inv { min, max } | IntOp::Fvor { min, max } => (Some(min), Some(max), None, None, None),
        };
        [cell(min), cell(max), cell(t), cell(d), "-".into(), cell(value)].join(",")
    }

    pub fn procedures(&self) -> u8 {
        if matches!(self, IntOp::Vor { .. }) {
            2
        } else {
            1
        }
    }
}

/// New value of `v` before clamping to `[lo, hi]`, or `None` when the
/// precondition does not hold.
pub fn int_reference(op: IntOp, procedure: u8, v: i128, lo: i128, hi: i128, rng: &mut SplitMix64) -> Option<i128> {
    let w = |x: i64| i128::from(x);
    match op {
        IntOp::Vat { t, d } => (v <= w(t)).then(|| w(t) + w(d)),
        IntOp::Vbt { t, d } => (v >= w(t)).then(|| w(t) - w(d)),
        IntOp::Fvat { t, d } => (v > w(t)).then(|| w(t) - w(d)),
        IntOp::Fvbt { t, d } => (v < w(t)).then(|| w(t) + w(d)),
        IntOp::Vor { min, max, d } => {
            (w(min) <= v && v <= w(max)).then(|| if procedure == 0 { w(min) - w(d) } else { w(max) + w(d) })
        }
        IntOp::Iv { value } => (v != w(value)).then(|| w(value)),
        IntOp::Asa { t, d, k } => Some(if v >= w(t) {
            w(t) + (v - w(t)) * w(k) + w(d)
        } else {
            w(t) - (w(t) - v) * w(k) - w(d)
        }),
        IntOp::Ss { d } => Some(v + w(d)),
        IntOp::Inv { min, max } => {
            let candidates: Vec<i128> = (w(min).max(lo)..=w(max).min(hi)).filter(|&x| x != v).collect();
            if candidates.is_empty() {
                return None;
            }
            Some(candidates[rng.below(candidates.len() as u128) as usize])
        }
        IntOp::Fvor { min, max } => {
            let (a, b) = (w(min).max(lo), w(max).min(hi));
            if a > b || (a <= v && v <= b) {
                return None;
            }
            let candidates: Vec<i128> = (a..=b).collect();
            Some(candidates[rng.below(candidates.len() as u128) as usize])
        }
    }
}

/// Real-domain operator on native IEEE items.
#[derive(Debug, Clone, Copy)]
pub enum RealOp {
    Vat { t: f64, d: f64 },
    Vbt { t: f64, d: f64 },
    Fvat { t: f64, d: f64 },
    Fvbt { t: f64, d: f64 },
    Vor { min: f64, max: f64, d: f64 },
    Iv { value: f64 },
    Asa { t: f64, d: f64, k: f64 },
    Ss { d: f64 },
    Inv { min: f64, max: f64 },
    Fvor { min: f64, max: f64 },
}

fn rcell(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:?}"))
}

impl RealOp {
    pub fn name(&self) -> &'static str {
        match self {
            RealOp::Vat { .. } => "VAT",
            RealOp::Vbt { .. } => "VBT",
            RealOp::Fvat { .. } => "FVAT",
            RealOp::Fvbt { .. } => "FVBT",
            RealOp::Vor { .. } => "VOR",
            RealOp::Iv { .. } => "IV",
            RealOp::Asa { .. } => "ASA",
            RealOp::Ss { .. } => "SS",
            RealOp::Inv { .. } => "INV",
            RealOp::Fvor { .. } => "FVOR",
        }
    }

    pub fn cells(&self) -> String {
        let (min, max, t, d, value) = match *self {
            RealOp::Vat { t, d } | RealOp::Vbt { t, d } | RealOp::Fvat { t, d } | RealOp::Fvbt { t, d } => {
                (None, None, Some(t), Some(d), None)
            }
            RealOp::Vor { min, max, d } => (Some(min), Some(max), None, Some(d), None),
            RealOp::Iv { value } => (None, None, None, None, Some(value)),
            RealOp::Asa { t, d, k } => (None, None, Some(t), Some(d), Some(k)),
            RealOp::Ss { d } => (None, None, None, Some(d), None),
            RealOp::Inv { min, max } | RealOp::Fvor { min, max } => (Some(min), Some(max), None, None, None),
        };
        [rcell(min), rcell(max), rcell(t), rcell(d), "-".into(), rcell(value)].join(",")
    }

    pub fn procedures(&self) -> u8 {
        if matches!(self, RealOp::Vor { .. }) {
            2
        } else {
            1
        }
    }
}

fn as_stored(x: f64, single: bool) -> f64 {
    if single {
        x as f32 as f64
    } else {
        x
    }
}

fn uniform(min: f64, max: f64, rng: &mut SplitMix64) -> f64 {
    if min == max {
        return min;
    }
    let x = min + rng.unit() * (max - min);
    if x < min {
        min
    } else if x > max {
        max
    } else {
        x
    }
}

pub fn real_reference(op: RealOp, procedure: u8, v: f64, single: bool, rng: &mut SplitMix64) -> Option<f64> {
    match op {
        RealOp::Vat { t, d } => (v <= t).then_some(t + d),
        RealOp::Vbt { t, d } => (v >= t).then_some(t - d),
        RealOp::Fvat { t, d } => (v > t).then_some(t - d),
        RealOp::Fvbt { t, d } => (v < t).then_some(t + d),
        RealOp::Vor { min, max, d } => (min <= v && v <= max).then_some(if procedure == 0 { min - d } else { max + d }),
        RealOp::Iv { value } => (v != value).then_some(value),
        RealOp::Asa { t, d, k } => Some(if v >= t { t + (v - t) * k + d } else { t - (t - v) * k - d }),
        RealOp::Ss { d } => Some(v + d),
        RealOp::Inv { min, max } => {
            if min == max {
                return (as_stored(min, single) != as_stored(v, single)).then_some(min);
            }
            (0..64)
                .map(|_| uniform(min, max, rng))
                .find(|r| as_stored(*r, single) != as_stored(v, single))
        }
        RealOp::Fvor { min, max } => (v < min || v > max).then(|| uniform(min, max, rng)),
    }
}

/// Saturates finite overflow at the storage format's largest finite value.
pub fn real_clamp(x: f64, original: f64, single: bool) -> (f64, bool) {
    let max = if single { f32::MAX as f64 } else { f64::MAX };
    if x.is_nan() || (-max..=max).contains(&x) || (x.is_infinite() && original.is_infinite()) {
        (x, false)
    } else if x > 0.0 {
        (max, true)
    } else {
        (-max, true)
    }
}

/// Bits of `bytes` (LSB-0 over the little-endian integer) flipped by a BF
/// operation, drawn as in a partial Fisher-Yates shuffle.
pub fn bf_reference(
    bytes: &[u8],
    big_endian: bool,
    min: usize,
    max: usize,
    state: Option<bool>,
    count: usize,
    rng: &mut SplitMix64,
) -> Option<Vec<u8>> {
    let locate = |i: usize| {
        let byte = if big_endian { bytes.len() - 1 - i / 8 } else { i / 8 };
        (byte, 1u8 << (i % 8))
    };
    let mut pool: Vec<usize> = (min..=max)
        .filter(|&i| {
            let (byte, mask) = locate(i);
            state.is_none_or(|s| (bytes[byte] & mask != 0) == s)
        })
        .collect();
    if pool.len() < count {
        return None;
    }
    let mut out = bytes.to_vec();
    for i in 0..count {
        let j = i + rng.below((pool.len() - i) as u128) as usize;
        pool.swap(i, j);
        let (byte, mask) = locate(pool[i]);
        out[byte] ^= mask;
    }
    Some(out)
}

/// HV output: each window of `times` observations repeats its first value.
pub fn hv_reference<T: Clone>(stream: &[T], times: usize) -> Vec<T> {
    (0..stream.len()).map(|i| stream[i - i % times].clone()).collect()
}
