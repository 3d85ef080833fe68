//! Randomized invariants over integer and bit-field items of every width.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::{single_row_spec, Stream};

pub const CASES: u32 = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct Item {
    pub width: usize,
    pub signed: bool,
    pub big_endian: bool,
}

impl Item {
    pub fn bounds(self) -> (i128, i128) {
        let bits = 8 * self.width as u32;
        if self.signed {
            (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1)
        } else {
            (0, (1i128 << bits) - 1)
        }
    }

    pub fn rep(self) -> &'static str {
        if self.signed {
            "INT"
        } else {
            "HEX"
        }
    }

    pub fn encode(self, v: i128) -> Vec<u8> {
        let le = (v as u64).to_le_bytes();
        let mut out = le[..self.width].to_vec();
        if self.big_endian {
            out.reverse();
        }
        out
    }

    pub fn decode(self, bytes: &[u8]) -> i128 {
        let mut le = bytes.to_vec();
        if self.big_endian {
            le.reverse();
        }
        let mut raw = 0u64;
        for (i, b) in le.iter().enumerate() {
            raw |= u64::from(*b) << (8 * i);
        }
        let bits = 8 * self.width as u32;
        if self.signed && bits < 64 && raw >> (bits - 1) & 1 == 1 {
            i128::from(raw) - (1i128 << bits)
        } else if self.signed {
            i128::from(raw as i64)
        } else {
            i128::from(raw)
        }
    }
}

fn item() -> impl Strategy<Value = Item> {
    (prop::sample::select(vec![1usize, 2, 4, 8]), any::<bool>(), any::<bool>())
        .prop_map(|(width, signed, big_endian)| Item { width, signed, big_endian })
}

/// A value in `[lo, hi]` given a raw draw.
fn pick(raw: u64, lo: i128, hi: i128) -> i128 {
    lo + (u128::from(raw) % ((hi - lo) as u128 + 1)) as i128
}

/// Grid parameters are limited to 2^64 in magnitude; 8-byte items keep
/// thresholds inside that window.
fn param_bounds(it: Item) -> (i128, i128) {
    let (lo, hi) = it.bounds();
    (lo.max(-(1i128 << 63)), hi.min((1i128 << 63) - 1))
}

/// Range operator parameters with `MIN − Δ` and `MAX + Δ` representable.
#[derive(Debug, Clone, Copy)]
struct RangeCase {
    item: Item,
    min: i128,
    max: i128,
    delta: i128,
    value: i128,
    procedure: u8,
}

fn range_case() -> impl Strategy<Value = RangeCase> {
    (item(), any::<[u64; 4]>(), 0u8..2, 0u8..3).prop_map(|(item, raw, procedure, near)| {
        let (lo, hi) = param_bounds(item);
        let span = hi - lo;
        let delta = 1 + pick(raw[0], 0, (span / 8).min(1 << 20));
        let a = pick(raw[1], lo + delta, hi - delta);
        let b = pick(raw[2], lo + delta, hi - delta);
        let (min, max) = (a.min(b), a.max(b));
        let (ilo, ihi) = item.bounds();
        let value = match near {
            0 => pick(raw[3], min, max),
            1 => pick(raw[3], (min - 2).max(ilo), (min + 2).min(ihi)),
            _ => pick(raw[3], ilo, ihi),
        };
        RangeCase { item, min, max, delta, value, procedure }
    })
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn feed(item: Item, op: &str, cells: &str, mutant: u32, seed: u64, v: i128) -> super::Step {
    let spec = single_row_spec(item.rep(), item.width, item.big_endian, op, cells);
    Stream::new(&spec, mutant, seed).feed(&item.encode(v))
}

/// An applied VOR leaves the range on the chosen side.
pub fn vor_leaves_range(cases: u32) -> Result<(), String> {
    run(cases, (range_case(), any::<u64>()), |(c, seed)| {
        let cells = format!("{},{},-,{},-,-", c.min, c.max, c.delta);
        let step = feed(c.item, "VOR", &cells, u32::from(c.procedure) + 1, seed, c.value);
        let inside = c.min <= c.value && c.value <= c.max;
        prop_assert_eq!(step.guard, inside);
        let out = c.item.decode(&step.bytes);
        if step.applied {
            prop_assert!(out < c.min || out > c.max, "{} inside [{}, {}]", out, c.min, c.max);
            prop_assert_eq!(out, if c.procedure == 0 { c.min - c.delta } else { c.max + c.delta });
        }
        prop_assert!(!step.clamped);
        Ok(())
    })
}

/// INV and FVOR results lie within `[MIN, MAX]`; INV always changes the value.
pub fn inv_fvor_stay_inside(cases: u32) -> Result<(), String> {
    run(cases, (range_case(), any::<u64>(), any::<bool>()), |(c, seed, fvor)| {
        let cells = format!("{},{},-,-,-,-", c.min, c.max);
        let op = if fvor { "FVOR" } else { "INV" };
        let step = feed(c.item, op, &cells, 1, seed, c.value);
        let out = c.item.decode(&step.bytes);
        let inside = c.min <= c.value && c.value <= c.max;
        if fvor {
            prop_assert_eq!(step.guard, !inside);
        } else {
            prop_assert!(step.guard == (c.min < c.max || !inside));
        }
        if step.guard {
            prop_assert!(c.min <= out && out <= c.max, "{} outside [{}, {}]", out, c.min, c.max);
        }
        if step.guard && !fvor {
            prop_assert!(step.applied && out != c.value);
        }
        Ok(())
    })
}

#[derive(Debug, Clone)]
struct BfCase {
    width: usize,
    big_endian: bool,
    bytes: Vec<u8>,
    min: usize,
    max: usize,
    state: i8,
    count: usize,
}

fn bf_case() -> impl Strategy<Value = BfCase> {
    (prop::sample::select(vec![1usize, 2, 4, 8]), any::<bool>(), any::<[u8; 8]>(), any::<[u16; 3]>(), -1i8..2)
        .prop_map(|(width, big_endian, raw, picks, state)| {
            let bits = width * 8;
            let a = picks[0] as usize % bits;
            let b = picks[1] as usize % bits;
            let (min, max) = (a.min(b), a.max(b));
            let count = 1 + picks[2] as usize % (max - min + 1);
            BfCase { width, big_endian, bytes: raw[..width].to_vec(), min, max, state, count }
        })
}

fn bit(bytes: &[u8], big_endian: bool, i: usize) -> bool {
    let byte = if big_endian { bytes.len() - 1 - i / 8 } else { i / 8 };
    bytes[byte] >> (i % 8) & 1 == 1
}

/// BF flips exactly VALUE bits, all inside `[MIN, MAX]` and all in STATE.
pub fn bf_flips_exactly(cases: u32) -> Result<(), String> {
    run(cases, (bf_case(), any::<u64>()), |(c, seed)| {
        let cells = format!("{},{},-,-,{},{}", c.min, c.max, c.state, c.count);
        let spec = single_row_spec("BIN", c.width, c.big_endian, "BF", &cells);
        let step = Stream::new(&spec, 1, seed).feed(&c.bytes);
        let eligible = (c.min..=c.max)
            .filter(|&i| c.state < 0 || bit(&c.bytes, c.big_endian, i) == (c.state == 1))
            .count();
        prop_assert_eq!(step.guard, eligible >= c.count);
        let flipped: Vec<usize> = (0..c.width * 8)
            .filter(|&i| bit(&c.bytes, c.big_endian, i) != bit(&step.bytes, c.big_endian, i))
            .collect();
        if !step.guard {
            prop_assert!(flipped.is_empty());
            return Ok(());
        }
        prop_assert_eq!(flipped.len(), c.count);
        for i in flipped {
            prop_assert!(c.min <= i && i <= c.max);
            if c.state >= 0 {
                prop_assert_eq!(bit(&c.bytes, c.big_endian, i), c.state == 1);
            }
        }
        Ok(())
    })
}

/// Whenever the precondition fails, or nothing is applied, the buffer is
/// untouched.
pub fn guard_false_keeps_bytes(cases: u32) -> Result<(), String> {
    let ops = prop::sample::select(vec!["VAT", "VBT", "FVAT", "FVBT", "VOR", "IV", "FVOR"]);
    run(cases, (range_case(), ops, any::<u64>()), |(c, op, seed)| {
        let cells = match op {
            "VOR" => format!("{},{},-,{},-,-", c.min, c.max, c.delta),
            "FVOR" => format!("{},{},-,-,-,-", c.min, c.max),
            "IV" => format!("-,-,-,-,-,{}", c.min),
            _ => format!("-,-,{},{},-,-", c.min, c.delta),
        };
        let mutant = if op == "VOR" { u32::from(c.procedure) + 1 } else { 1 };
        let step = feed(c.item, op, &cells, mutant, seed, c.value);
        if !step.guard || !step.applied {
            prop_assert_eq!(step.bytes, c.item.encode(c.value));
        }
        Ok(())
    })
}

/// For thresholds with `T ± Δ` representable, exactly one of VAT/FVAT and
/// exactly one of VBT/FVBT has its precondition hold, and exactly one of
/// VOR/FVOR does.
pub fn complementary_guards(cases: u32) -> Result<(), String> {
    run(cases, (range_case(), any::<u64>()), |(c, seed)| {
        let t = c.min;
        let thresholds = format!("-,-,{t},{},-,-", c.delta);
        let g = |op: &str, cells: &str, mutant: u32| feed(c.item, op, cells, mutant, seed, c.value).guard;
        prop_assert!(g("VAT", &thresholds, 1) != g("FVAT", &thresholds, 1));
        prop_assert!(g("VBT", &thresholds, 1) != g("FVBT", &thresholds, 1));
        let vor = format!("{},{},-,{},-,-", c.min, c.max, c.delta);
        let fvor = format!("{},{},-,-,-,-", c.min, c.max);
        prop_assert!(g("VOR", &vor, u32::from(c.procedure) + 1) != g("FVOR", &fvor, 1));
        Ok(())
    })
}

pub type Property = (&'static str, fn(u32) -> Result<(), String>);

pub const ALL: [Property; 5] = [
    ("VOR leaves [MIN, MAX]", vor_leaves_range),
    ("INV/FVOR stay in [MIN, MAX]", inv_fvor_stay_inside),
    ("BF flips exactly VALUE eligible bits", bf_flips_exactly),
    ("false guard keeps bytes", guard_false_keeps_bytes),
    ("complementary guards", complementary_guards),
];
