//! Mutation procedures and the probe entry point.
//!
//! A [`MutationContext`] holds exactly one active mutation operation (or the
//! coverage mutant). [`mutate`] is called on every buffer that crosses a
//! probe: buffers of the targeted fault model get the operation applied, the
//! coverage mutant records which fault models a test exercises, and every
//! other buffer passes through untouched.

mod log;
pub mod procedures;
mod resolve;

use thiserror::Error;

pub use log::{parse_log, read_log, ApplicationRecord, LogReadError, LogSink, RecordKind};
pub use procedures::{Factor, HoldState, Outcome};
pub use resolve::{resolve, Procedure, Resolved, ResolveError, GRID_PARAM_LIMIT};

use crate::catalog::{Catalog, CatalogError, MutantId, MutationOperation};
use crate::codec::{
    read_f32, read_f64, read_integer, write_integer, write_unsigned, CodecError, ItemLocator,
};
use crate::faultmodel::{Endianness, FaultModel};
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("row {row}: {source}")]
    Resolve {
        row: usize,
        #[source]
        source: ResolveError,
    },
    #[error("row {row}: {source}")]
    Codec {
        row: usize,
        #[source]
        source: CodecError,
    },
    #[error("buffer for {model} has {actual} bytes, expected {expected}")]
    BufferLength {
        model: String,
        expected: usize,
        actual: usize,
    },
    #[error("cannot write application log: {0}")]
    Log(#[source] std::io::Error),
}

/// The operation a context applies, with parameters resolved.
#[derive(Debug, Clone)]
pub struct ActiveOperation {
    pub fault_model: String,
    pub row_index: usize,
    pub procedure_index: u8,
    pub locator: ItemLocator,
    pub resolved: Resolved,
}

impl ActiveOperation {
    pub fn new(op: &MutationOperation) -> Result<Self, EngineError> {
        let resolved =
            resolve(&op.row, &op.locator, op.procedure_index).map_err(|source| EngineError::Resolve {
                row: op.row_index,
                source,
            })?;
        Ok(Self {
            fault_model: op.fault_model.clone(),
            row_index: op.row_index,
            procedure_index: op.procedure_index,
            locator: op.locator,
            resolved,
        })
    }
}

#[derive(Debug)]
pub struct MutationContext {
    mutant: MutantId,
    active: Option<ActiveOperation>,
    rng: SplitMix64,
    hold: HoldState<Vec<u8>>,
    application_counter: u64,
    next_sequence: u64,
    sink: LogSink,
}

impl MutationContext {
    pub fn coverage(global_seed: u64, sink: LogSink) -> Self {
        Self::build(MutantId::COVERAGE, None, global_seed, sink)
    }

    /// Context for `mutant`; id 0 yields the coverage mutant.
    pub fn for_mutant(
        catalog: &Catalog,
        mutant: MutantId,
        global_seed: u64,
        sink: LogSink,
    ) -> Result<Self, EngineError> {
        if mutant.is_coverage() {
            return Ok(Self::coverage(global_seed, sink));
        }
        Self::for_operation(catalog.lookup(mutant)?, global_seed, sink)
    }

    pub fn for_operation(
        op: &MutationOperation,
        global_seed: u64,
        sink: LogSink,
    ) -> Result<Self, EngineError> {
        Ok(Self::build(op.id, Some(ActiveOperation::new(op)?), global_seed, sink))
    }

    fn build(
        mutant: MutantId,
        active: Option<ActiveOperation>,
        global_seed: u64,
        sink: LogSink,
    ) -> Self {
        Self {
            mutant,
            active,
            rng: SplitMix64::new(derive_seed(global_seed, mutant.0)),
            hold: HoldState::default(),
            application_counter: 0,
            next_sequence: 0,
            sink,
        }
    }

    pub fn mutant(&self) -> MutantId {
        self.mutant
    }

    pub fn active(&self) -> Option<&ActiveOperation> {
        self.active.as_ref()
    }

    /// Number of invocations whose guard held.
    pub fn application_counter(&self) -> u64 {
        self.application_counter
    }

    /// Records kept by a memory sink.
    pub fn records(&self) -> &[ApplicationRecord] {
        self.sink.records()
    }

    pub fn into_sink(self) -> LogSink {
        self.sink
    }

    fn log(&mut self, record: ApplicationRecord) -> Result<(), EngineError> {
        self.next_sequence += 1;
        self.sink.write(record).map_err(EngineError::Log)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeEffect {
    /// The buffer is not targeted by the active mutant.
    Untargeted,
    /// Coverage mutant: the fault model was recorded.
    Covered,
    Mutation { applied: bool, clamped: bool },
}

/// Result of running a resolved procedure over one item's bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemUpdate {
    pub bytes: Vec<u8>,
    pub guard: bool,
    pub clamped: bool,
}

fn eval_integer(procedure: &Procedure<i128>, v: i128, rng: &mut SplitMix64) -> Outcome<i128> {
    use procedures as p;
    match *procedure {
        Procedure::Vat { t, delta } => p::vat(v, t, delta),
        Procedure::Vbt { t, delta } => p::vbt(v, t, delta),
        Procedure::Vor { min, max, delta, procedure } => p::vor(v, min, max, delta, procedure),
        Procedure::Inv { min, max } => p::inv_integer(v, min, max, rng),
        Procedure::Iv { value } => p::iv(v, value),
        Procedure::Asa { t, delta, factor } => p::asa(v, t, delta, factor),
        Procedure::Ss { delta } => p::ss(v, delta),
        Procedure::Fvat { t, delta } => p::fvat(v, t, delta),
        Procedure::Fvbt { t, delta } => p::fvbt(v, t, delta),
        Procedure::Fvor { min, max } => p::fvor_integer(v, min, max, rng),
    }
}

fn eval_real(
    procedure: &Procedure<f64>,
    v: f64,
    single: bool,
    rng: &mut SplitMix64,
) -> Outcome<f64> {
    use procedures as p;
    match *procedure {
        Procedure::Vat { t, delta } => p::vat(v, t, delta),
        Procedure::Vbt { t, delta } => p::vbt(v, t, delta),
        Procedure::Vor { min, max, delta, procedure } => p::vor(v, min, max, delta, procedure),
        Procedure::Inv { min, max } => p::inv_real(v, min, max, single, rng),
        Procedure::Iv { value } => p::iv(v, value),
        Procedure::Asa { t, delta, factor } => p::asa(v, t, delta, factor),
        Procedure::Ss { delta } => p::ss(v, delta),
        Procedure::Fvat { t, delta } => p::fvat(v, t, delta),
        Procedure::Fvbt { t, delta } => p::fvbt(v, t, delta),
        Procedure::Fvor { min, max } => p::fvor_real(v, min, max, rng),
    }
}

/// Clamps a real result into the finite range of its storage format.
/// Infinities produced from infinite inputs are kept.
pub fn clamp_real(x: f64, original: f64, single: bool) -> (f64, bool) {
    let limit = if single { f64::from(f32::MAX) } else { f64::MAX };
    if x.is_nan() || x.abs() <= limit || (x.is_infinite() && original.is_infinite()) {
        (x, false)
    } else {
        (limit.copysign(x), true)
    }
}

/// Runs `resolved` over the bytes of one item.
pub fn apply(
    resolved: &Resolved,
    endianness: Endianness,
    item: &[u8],
    rng: &mut SplitMix64,
    hold: &mut HoldState<Vec<u8>>,
) -> ItemUpdate {
    let unchanged = |guard: bool| ItemUpdate {
        bytes: item.to_vec(),
        guard,
        clamped: false,
    };
    match resolved {
        Resolved::Integer { encoding, procedure } => {
            let (lo, hi) = encoding.integer_bounds().expect("integer-backed encoding");
            let v = read_integer(item, *encoding, endianness);
            let out = eval_integer(procedure, v, rng);
            if !out.guard {
                return unchanged(false);
            }
            let value = out.value.clamp(lo, hi);
            let mut bytes = item.to_vec();
            write_integer(&mut bytes, value, endianness);
            ItemUpdate {
                bytes,
                guard: true,
                clamped: value != out.value,
            }
        }
        Resolved::Real { single, procedure } => {
            let v = if *single {
                f64::from(read_f32(item, endianness))
            } else {
                read_f64(item, endianness)
            };
            let out = eval_real(procedure, v, *single, rng);
            if !out.guard {
                return unchanged(false);
            }
            let (value, clamped) = clamp_real(out.value, v, *single);
            let raw = if *single {
                u64::from((value as f32).to_bits())
            } else {
                value.to_bits()
            };
            let mut bytes = item.to_vec();
            write_unsigned(&mut bytes, raw, endianness);
            ItemUpdate {
                bytes,
                guard: true,
                clamped,
            }
        }
        Resolved::BitFlip { min, max, state, count } => {
            let out = procedures::bf(item, endianness, *min, *max, *state, *count, rng);
            ItemUpdate {
                guard: out.guard,
                bytes: out.value,
                clamped: false,
            }
        }
        Resolved::Hold { times } => {
            let out = procedures::hv(hold, item.to_vec(), *times);
            ItemUpdate {
                guard: out.guard,
                bytes: out.value,
                clamped: false,
            }
        }
    }
}

/// The probe: applies the context's operation to `buffer` if it targets `model`.
pub fn mutate(
    buffer: &mut [u8],
    model: &FaultModel,
    ctx: &mut MutationContext,
    test_id: &str,
) -> Result<ProbeEffect, EngineError> {
    if buffer.len() != model.buffer_len() {
        return Err(EngineError::BufferLength {
            model: model.name.clone(),
            expected: model.buffer_len(),
            actual: buffer.len(),
        });
    }
    let sequence_no = ctx.next_sequence;
    let Some(active) = ctx.active.as_ref() else {
        let record = ApplicationRecord {
            sequence_no,
            kind: RecordKind::Coverage,
            test_id: test_id.to_string(),
            fault_model: model.name.clone(),
            mutant_id: MutantId::COVERAGE,
            row_index: None,
            procedure_index: None,
            applied: false,
            clamped: false,
            original_bytes: String::new(),
            mutated_bytes: String::new(),
        };
        ctx.log(record)?;
        return Ok(ProbeEffect::Covered);
    };
    if active.fault_model != model.name {
        return Ok(ProbeEffect::Untargeted);
    }
    let range = active.locator.byte_range();
    let item = buffer
        .get(range.clone())
        .ok_or_else(|| EngineError::Codec {
            row: active.row_index,
            source: CodecError::OutOfBounds {
                range: range.clone(),
                len: model.buffer_len(),
            },
        })?
        .to_vec();
    let update = apply(
        &active.resolved,
        active.locator.endianness,
        &item,
        &mut ctx.rng,
        &mut ctx.hold,
    );
    if update.guard {
        ctx.application_counter += 1;
    }
    let applied = update.bytes != item;
    buffer[range].copy_from_slice(&update.bytes);
    let record = ApplicationRecord {
        sequence_no,
        kind: RecordKind::Mutation,
        test_id: test_id.to_string(),
        fault_model: model.name.clone(),
        mutant_id: ctx.mutant,
        row_index: Some(active.row_index),
        procedure_index: Some(active.procedure_index),
        applied,
        clamped: update.clamped,
        original_bytes: hex::encode(&item),
        mutated_bytes: hex::encode(&update.bytes),
    };
    ctx.log(record)?;
    Ok(ProbeEffect::Mutation {
        applied,
        clamped: update.clamped,
    })
}
