//! Shared oracles: used by this crate's integration tests and by the
//! acceptance suite.
#![allow(dead_code)]

pub mod properties;
pub mod reference;

use damut_core::catalog::MutantId;
use damut_core::engine::{mutate, LogSink, MutationContext};
use damut_core::faultmodel::{load_spec, FaultModelSpec};
use damut_core::rng::{derive_seed, SplitMix64};

use reference::{bf_reference, hv_reference, int_reference, real_clamp, real_reference, IntOp, RealOp};

pub const HEADER: &str = "Fault Model,Position,Span,Type,Op,MIN,MAX,T,DELTA,STATE,VALUE\n";

/// A spec with one model `M` holding exactly one item at position 0.
pub fn single_row_spec(rep: &str, span: usize, big_endian: bool, op: &str, cells: &str) -> FaultModelSpec {
    let csv = format!("{HEADER}M,0,{span},{rep},{op},{cells}\n");
    let endianness = if big_endian { "big" } else { "little" };
    let sidecar = format!("[model M]\nunit_size=1\nbuffer_size={span}\nendianness={endianness}\n");
    load_spec(&csv, &sidecar).unwrap_or_else(|e| panic!("{csv}: {e}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub bytes: Vec<u8>,
    pub applied: bool,
    pub clamped: bool,
    pub guard: bool,
}

/// Feeds observations of model `M` through one mutant.
pub struct Stream {
    spec: FaultModelSpec,
    ctx: MutationContext,
}

impl Stream {
    pub fn new(spec: &FaultModelSpec, mutant: u32, seed: u64) -> Self {
        let catalog = damut_core::catalog::Catalog::new(spec);
        let ctx = MutationContext::for_mutant(&catalog, MutantId(mutant), seed, LogSink::memory()).unwrap();
        Self { spec: spec.clone(), ctx }
    }

    pub fn feed(&mut self, input: &[u8]) -> Step {
        let mut bytes = input.to_vec();
        let before = self.ctx.application_counter();
        mutate(&mut bytes, &self.spec.models[0], &mut self.ctx, "oracle").unwrap();
        let record = self.ctx.records().last().expect("targeted buffers are logged");
        Step {
            applied: record.applied,
            clamped: record.clamped,
            guard: self.ctx.application_counter() > before,
            bytes,
        }
    }
}

fn int_ops() -> Vec<IntOp> {
    use IntOp::*;
    vec![
        Vat { t: -5, d: 1 },
        Vat { t: 100, d: 50 },
        Vat { t: -200, d: 0 },
        Vbt { t: 10, d: 3 },
        Vbt { t: 0, d: 0 },
        Vbt { t: 300, d: 1 },
        Fvat { t: 3, d: 1 },
        Fvat { t: 250, d: 400 },
        Fvbt { t: -3, d: 2 },
        Fvbt { t: 200, d: 60 },
        Vor { min: -20, max: 50, d: 1 },
        Vor { min: 0, max: 255, d: 1 },
        Vor { min: 5, max: 5, d: 10 },
        Iv { value: -1 },
        Iv { value: 255 },
        Iv { value: 300 },
        Asa { t: 3, d: 0, k: 2 },
        Asa { t: -10, d: 1, k: 5 },
        Asa { t: 100, d: 2, k: -1 },
        Ss { d: 5 },
        Ss { d: -300 },
        Inv { min: -20, max: 50 },
        Inv { min: 5, max: 5 },
        Inv { min: -1000, max: 1000 },
        Fvor { min: -20, max: 50 },
        Fvor { min: 0, max: 0 },
    ]
}

fn real_ops() -> Vec<RealOp> {
    use RealOp::*;
    vec![
        Vat { t: 1.5, d: 0.25 },
        Vbt { t: 1.5, d: 0.25 },
        Fvat { t: 1.5, d: 0.25 },
        Fvbt { t: 1.5, d: 0.25 },
        Vor { min: -1.0, max: 1.0, d: 0.5 },
        Iv { value: 2.5 },
        Asa { t: 1.0, d: 0.5, k: 3.0 },
        Asa { t: 0.0, d: 0.0, k: 1e300 },
        Ss { d: 1e308 },
        Ss { d: -0.1 },
        Inv { min: -1.0, max: 1.0 },
        Inv { min: 0.1, max: 0.1 },
        Fvor { min: -1.0, max: 1.0 },
    ]
}

fn boundary_doubles() -> Vec<f64> {
    let up = |x: f64| f64::from_bits(x.to_bits() + 1);
    let down = |x: f64| f64::from_bits(x.to_bits() - 1);
    vec![
        0.0,
        -0.0,
        5e-324,
        -5e-324,
        f64::MIN_POSITIVE,
        1.0,
        -1.0,
        up(1.0),
        down(-1.0),
        1.5,
        up(1.5),
        down(1.5),
        1.75,
        2.5,
        0.1,
        0.5,
        -0.5,
        f64::MAX,
        -f64::MAX,
        1e308,
        f32::MAX as f64,
        up(f32::MAX as f64),
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NAN,
    ]
}

fn mismatch(what: String, expected: &Step, actual: &Step) -> String {
    format!("{what}: expected {expected:?}, engine gave {actual:?}")
}

/// Every operator over every 1-byte value (signed and unsigned, plus BIN
/// and HV), and over boundary doubles on IEEE items. Returns the number of
/// compared observations.
pub fn operator_oracle() -> Result<usize, String> {
    let seed = 0x5EED;
    let mut cases = 0;
    for (rep, lo, hi) in [("INT", -128i128, 127i128), ("HEX", 0, 255)] {
        for op in int_ops() {
            let spec = single_row_spec(rep, 1, false, op.name(), &op.cells());
            for procedure in 0..op.procedures() {
                let id = u32::from(procedure) + 1;
                let mut stream = Stream::new(&spec, id, seed);
                let mut rng = SplitMix64::new(derive_seed(seed, id));
                for b in 0..=255u8 {
                    let v = if lo < 0 { i128::from(b as i8) } else { i128::from(b) };
                    let expected = match int_reference(op, procedure, v, lo, hi, &mut rng) {
                        None => Step { bytes: vec![b], applied: false, clamped: false, guard: false },
                        Some(x) => {
                            let c = x.clamp(lo, hi);
                            Step { bytes: vec![c as u8], applied: c != v, clamped: c != x, guard: true }
                        }
                    };
                    let actual = stream.feed(&[b]);
                    if actual != expected {
                        return Err(mismatch(format!("{rep} {op:?}/{procedure} at v={v}"), &expected, &actual));
                    }
                    cases += 1;
                }
            }
        }
    }

    let bf_configs: [(usize, usize, i8, usize); 6] =
        [(0, 7, -1, 1), (0, 7, -1, 3), (2, 5, 0, 2), (3, 3, 1, 1), (0, 7, 1, 8), (6, 7, 0, 2)];
    for (min, max, state, count) in bf_configs {
        let spec = single_row_spec("BIN", 1, false, "BF", &format!("{min},{max},-,-,{state},{count}"));
        let mut stream = Stream::new(&spec, 1, seed);
        let mut rng = SplitMix64::new(derive_seed(seed, 1));
        let state = match state {
            -1 => None,
            s => Some(s == 1),
        };
        for b in 0..=255u8 {
            let expected = match bf_reference(&[b], false, min, max, state, count, &mut rng) {
                None => Step { bytes: vec![b], applied: false, clamped: false, guard: false },
                Some(bytes) => Step { applied: bytes != [b], bytes, clamped: false, guard: true },
            };
            let actual = stream.feed(&[b]);
            if actual != expected {
                return Err(mismatch(format!("BF {min}..{max} state {state:?} x{count} at {b:#04x}"), &expected, &actual));
            }
            cases += 1;
        }
    }

    for times in [1usize, 2, 5, 7] {
        let spec = single_row_spec("INT", 1, false, "HV", &format!("-,-,-,-,-,{times}"));
        let mut stream = Stream::new(&spec, 1, seed);
        let input: Vec<u8> = (0..=255u8).collect();
        let expected = hv_reference(&input, times);
        for (i, b) in input.iter().enumerate() {
            let actual = stream.feed(&[*b]);
            if actual.bytes != [expected[i]] {
                return Err(format!("HV x{times} at observation {i}: expected {:#04x}, got {:?}", expected[i], actual.bytes));
            }
            cases += 1;
        }
    }

    for (rep, span, single, big) in [("DOUBLE", 8, false, false), ("FLOAT", 4, true, true)] {
        for op in real_ops() {
            let spec = single_row_spec(rep, span, big, op.name(), &op.cells());
            for procedure in 0..op.procedures() {
                let id = u32::from(procedure) + 1;
                let mut stream = Stream::new(&spec, id, seed);
                let mut rng = SplitMix64::new(derive_seed(seed, id));
                for x in boundary_doubles() {
                    let (input, v) = if single {
                        let f = x as f32;
                        (f.to_be_bytes().to_vec(), f as f64)
                    } else {
                        (x.to_le_bytes().to_vec(), x)
                    };
                    let expected = match real_reference(op, procedure, v, single, &mut rng) {
                        None => Step { bytes: input.clone(), applied: false, clamped: false, guard: false },
                        Some(r) => {
                            let (c, clamped) = real_clamp(r, v, single);
                            let bytes = if single { (c as f32).to_be_bytes().to_vec() } else { c.to_le_bytes().to_vec() };
                            Step { applied: bytes != input, bytes, clamped, guard: true }
                        }
                    };
                    let actual = stream.feed(&input);
                    if actual != expected {
                        return Err(mismatch(format!("{rep} {op:?}/{procedure} at v={v:e}"), &expected, &actual));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

/// A slowly varying signal held in windows of five: the sixth value (9.00)
/// starts the second window.
pub fn hv_five_window_pattern() -> Result<(), String> {
    let input: [f64; 15] = [3.0, 4.0, 5.0, 6.0, 7.0, 9.0, 9.5, 8.0, 7.5, 7.0, 6.0, 5.5, 5.0, 4.0, 3.5];
    let expected: [f64; 15] = [3.0, 3.0, 3.0, 3.0, 3.0, 9.0, 9.0, 9.0, 9.0, 9.0, 6.0, 6.0, 6.0, 6.0, 6.0];
    let spec = single_row_spec("DOUBLE", 8, false, "HV", "-,-,-,-,-,5");
    let mut stream = Stream::new(&spec, 1, 1);
    let got: Vec<f64> = input
        .iter()
        .map(|x| f64::from_le_bytes(stream.feed(&x.to_le_bytes()).bytes.try_into().unwrap()))
        .collect();
    if got == expected {
        Ok(())
    } else {
        Err(format!("expected {expected:?}, got {got:?}"))
    }
}

/// Random streams on a 2-byte item for every V in 1..=8, checked against the
/// windowed reference and the latch counter.
pub fn hv_stream_law(streams_per_v: usize) -> Result<usize, String> {
    let mut rng = SplitMix64::new(0x4856);
    let mut cases = 0;
    for times in 1..=8usize {
        let spec = single_row_spec("INT", 2, false, "HV", &format!("-,-,-,-,-,{times}"));
        for s in 0..streams_per_v {
            let len = rng.below(64) as usize;
            let input: Vec<[u8; 2]> = (0..len)
                .map(|_| {
                    // Small alphabet so repeated values also occur naturally.
                    let v = if s % 2 == 0 { rng.below(4) as u16 } else { rng.next_u64() as u16 };
                    v.to_le_bytes()
                })
                .collect();
            let expected = hv_reference(&input, times);
            let mut stream = Stream::new(&spec, 1, s as u64);
            for (i, item) in input.iter().enumerate() {
                let step = stream.feed(item);
                let latch = i % times == 0;
                if step.bytes != expected[i] || step.guard == latch || step.applied != (step.bytes != *item) {
                    return Err(format!("V={times}, stream {s}, observation {i}: {step:?}, expected {:?}", expected[i]));
                }
                cases += 1;
            }
        }
    }
    Ok(cases)
}
