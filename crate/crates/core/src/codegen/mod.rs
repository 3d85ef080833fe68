//! C probe API generation.
//!
//! [`generate`] turns a spec into three artifacts:
//!
//! * `api.h`: one `mutate_FM_<name>(buffer, length, test_id)` entry point
//!   per fault model;
//! * `api.c`: the resolved operation table and a standard-library-only
//!   runtime (same SplitMix64 stream, procedures and log lines as the engine);
//! * `manifest.json`: the mutant-id table, identical to [`Catalog`].
//!
//! The active mutant is taken from a `DAMAT_MUTANT_ID` compile-time define
//! when present, otherwise from the environment variable of the same name.
//! With [`GenerateOptions::runtime_load`] the operation table is not compiled
//! in but read at probe start from `faultmodel.tbl` (or `$DAMAT_TABLE`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Catalog, MutantId, MutationOperation};
use crate::codec::Encoding;
use crate::engine::{ActiveOperation, EngineError, Factor, Procedure, Resolved};
use crate::faultmodel::{Endianness, FaultModelSpec, OperatorKind};

const RUNTIME: &str = include_str!("runtime.c");
const TABLES_MARKER: &str = "/* @TABLES@ */";

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerateOptions {
    pub runtime_load: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub mutant_id: MutantId,
    pub fault_model: String,
    pub row_index: usize,
    pub operator: OperatorKind,
    pub procedure_index: u8,
    pub position: usize,
    pub span: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestModel {
    pub name: String,
    pub function: String,
    pub buffer_len: usize,
    pub endianness: Endianness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub global_seed: u64,
    pub mutant_count: usize,
    pub fault_models: Vec<ManifestModel>,
    pub mutants: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedApi {
    pub header: String,
    pub source: String,
    pub manifest: Manifest,
    /// Operation table text, present for runtime-load builds.
    pub table: Option<String>,
}

impl GeneratedApi {
    pub fn manifest_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Writes `api.h`, `api.c`, `manifest.json` (and `faultmodel.tbl`) into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CodegenError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CodegenError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files = vec![
            ("api.h", self.header.clone()),
            ("api.c", self.source.clone()),
            ("manifest.json", self.manifest_json()),
        ];
        if let Some(table) = &self.table {
            files.push(("faultmodel.tbl", table.clone()));
        }
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Maps a fault-model name onto a C identifier suffix.
pub fn c_identifier(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

pub fn function_name(model: &str) -> String {
    format!("mutate_FM_{}", c_identifier(model))
}

fn c_string(text: &str) -> String {
    let mut out = String::from("\"");
    for byte in text.bytes() {
        match byte {
            b'"' => out.push_str("\\\""),
            b'\\' => out.push_str("\\\\"),
            0x20..=0x7e if byte != b'?' => out.push(byte as char),
            _ => {
                let _ = write!(out, "\\{byte:03o}");
            }
        }
    }
    out.push('"');
    out
}

/// One table entry as 23 unsigned words (the runtime-load line layout).
#[derive(Debug, Clone, Default)]
struct Entry {
    model: usize,
    row: usize,
    procedure: u8,
    kind: u8,
    op: u8,
    encoding: u8,
    offset: usize,
    width: usize,
    p: [i128; 3],
    r: [f64; 3],
    factor_real: bool,
    factor_k: i128,
    factor_x: f64,
    state: i8,
}

fn op_code(kind: OperatorKind) -> u8 {
    match kind {
        OperatorKind::Vat => 0,
        OperatorKind::Vbt => 1,
        OperatorKind::Vor => 2,
        OperatorKind::Bf => 3,
        OperatorKind::Inv => 4,
        OperatorKind::Iv => 5,
        OperatorKind::Asa => 6,
        OperatorKind::Ss => 7,
        OperatorKind::Hv => 8,
        OperatorKind::Fvat => 9,
        OperatorKind::Fvbt => 10,
        OperatorKind::Fvor => 11,
    }
}

fn encoding_code(encoding: Encoding) -> u8 {
    match encoding {
        Encoding::Signed { .. } => 0,
        Encoding::Unsigned { .. } => 1,
        Encoding::Ieee32 => 2,
        Encoding::Ieee64 => 3,
        Encoding::FixedPoint { .. } => 4,
        Encoding::Bits { .. } => 5,
    }
}

fn params<N: Copy + Default>(procedure: &Procedure<N>) -> ([N; 3], Option<Factor>) {
    let z = N::default();
    match *procedure {
        Procedure::Vat { t, delta }
        | Procedure::Vbt { t, delta }
        | Procedure::Fvat { t, delta }
        | Procedure::Fvbt { t, delta } => ([t, delta, z], None),
        Procedure::Vor { min, max, delta, .. } => ([min, max, delta], None),
        Procedure::Inv { min, max } | Procedure::Fvor { min, max } => ([min, max, z], None),
        Procedure::Iv { value } => ([value, z, z], None),
        Procedure::Asa { t, delta, factor } => ([t, delta, z], Some(factor)),
        Procedure::Ss { delta } => ([delta, z, z], None),
    }
}

fn entry(op: &MutationOperation, model: usize) -> Result<Entry, CodegenError> {
    let active = ActiveOperation::new(op)?;
    let encoding = op.locator.encoding().map_err(|e| EngineError::Codec {
        row: op.row_index,
        source: e,
    })?;
    let mut e = Entry {
        model,
        row: op.row_index,
        procedure: op.procedure_index,
        op: op_code(op.operator),
        encoding: encoding_code(encoding),
        offset: op.locator.byte_offset(),
        width: op.locator.byte_width(),
        state: -1,
        ..Entry::default()
    };
    let set_factor = |e: &mut Entry, factor: Option<Factor>| match factor {
        Some(Factor::Integer(k)) => e.factor_k = k,
        Some(Factor::Real(x)) => {
            e.factor_real = true;
            e.factor_x = x;
        }
        None => {}
    };
    match &active.resolved {
        Resolved::Integer { procedure, .. } => {
            e.kind = 0;
            let (p, factor) = params(procedure);
            e.p = p;
            set_factor(&mut e, factor);
        }
        Resolved::Real { procedure, .. } => {
            e.kind = 1;
            let (r, factor) = params(procedure);
            e.r = r;
            set_factor(&mut e, factor);
        }
        Resolved::BitFlip { min, max, state, count } => {
            e.kind = 2;
            e.p = [*min as i128, *max as i128, *count as i128];
            e.state = state.map_or(-1, i8::from);
        }
        Resolved::Hold { times } => {
            e.kind = 3;
            e.p[0] = i128::from(*times);
        }
    }
    Ok(e)
}

fn i128_words(v: i128) -> (u64, u64) {
    let bits = v as u128;
    ((bits >> 64) as u64, bits as u64)
}

fn i128_literal(v: i128) -> String {
    let (hi, lo) = i128_words(v);
    format!("DAMAT_I128(0x{hi:x}ULL, 0x{lo:x}ULL)")
}

impl Entry {
    fn words(&self, id: MutantId) -> Vec<u64> {
        let mut w = vec![
            u64::from(id.0),
            self.model as u64,
            self.row as u64,
            u64::from(self.procedure),
            u64::from(self.kind),
            u64::from(self.op),
            u64::from(self.encoding),
            self.offset as u64,
            self.width as u64,
        ];
        for p in self.p {
            let (hi, lo) = i128_words(p);
            w.extend([hi, lo]);
        }
        w.extend(self.r.map(f64::to_bits));
        w.push(u64::from(self.factor_real));
        let (hi, lo) = i128_words(self.factor_k);
        w.extend([hi, lo, self.factor_x.to_bits(), (self.state + 1) as u64]);
        w
    }

    fn initializer(&self) -> String {
        let r = self.r.map(|x| format!("0x{:x}ULL", x.to_bits()));
        format!(
            "{{{}UL, {}UL, {}UL, {}, {}, {}, {}, {}, {{{}, {}, {}}}, {{{}, {}, {}}}, {}, {}, 0x{:x}ULL, {}}}",
            self.model,
            self.row,
            self.procedure,
            self.kind,
            self.op,
            self.encoding,
            self.offset,
            self.width,
            i128_literal(self.p[0]),
            i128_literal(self.p[1]),
            i128_literal(self.p[2]),
            r[0],
            r[1],
            r[2],
            u8::from(self.factor_real),
            i128_literal(self.factor_k),
            self.factor_x.to_bits(),
            self.state,
        )
    }
}

pub fn generate(spec: &FaultModelSpec, options: GenerateOptions) -> Result<GeneratedApi, CodegenError> {
    let mut functions: BTreeMap<String, &str> = BTreeMap::new();
    for model in &spec.models {
        let function = function_name(&model.name);
        if let Some(other) = functions.insert(function.clone(), &model.name) {
            return Err(CodegenError::UnsupportedConstruct(format!(
                "fault models {other:?} and {:?} both map to {function}",
                model.name
            )));
        }
    }
    let catalog = Catalog::new(spec);
    let model_index = |name: &str| spec.models.iter().position(|m| m.name == name).expect("catalogued model");
    let entries = catalog
        .iter()
        .map(|op| entry(op, model_index(&op.fault_model)).map(|e| (op.id, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let max_width = entries.iter().map(|(_, e)| e.width).max().unwrap_or(0).max(1);

    let mut header = String::new();
    header.push_str("/* Mutation probe API. Generated by damut gen-api; do not edit. */\n");
    header.push_str("#ifndef DAMAT_API_H\n#define DAMAT_API_H\n\n#include <stddef.h>\n\n");
    let _ = writeln!(header, "#define DAMAT_MUTANT_COUNT {}\n", catalog.mutant_count());
    header.push_str("#ifdef __cplusplus\nextern \"C\" {\n#endif\n\n");
    for model in &spec.models {
        let _ = writeln!(
            header,
            "/* Fault model {}: {}-byte buffers. Returns 1 when the buffer was mutated. */",
            model.name.replace("*/", "* /"),
            model.buffer_len()
        );
        let _ = writeln!(
            header,
            "int {}(unsigned char *buffer, size_t length, const char *test_id);",
            function_name(&model.name)
        );
    }
    header.push_str("\n/* Invocations whose mutation precondition held. */\n");
    header.push_str("unsigned long long damat_application_counter(void);\n");
    header.push_str("\n#ifdef __cplusplus\n}\n#endif\n\n#endif\n");

    let mut tables = String::new();
    tables.push_str("static const damat_model damat_models[DAMAT_MODEL_COUNT] = {\n");
    for model in &spec.models {
        let _ = writeln!(
            tables,
            "    {{{}, {}, {}}},",
            c_string(&model.name),
            model.buffer_len(),
            u8::from(model.endianness == Endianness::Big)
        );
    }
    tables.push_str("};\n\n");
    let blank = "{0UL, 0UL, 0UL, 0, 0, 0, 0, 1, {0, 0, 0}, {0ULL, 0ULL, 0ULL}, 0, 0, 0ULL, -1}";
    if options.runtime_load {
        tables.push_str("static damat_op damat_ops[DAMAT_MUTANT_COUNT + 1];\n");
    } else {
        tables.push_str("static const damat_op damat_ops[DAMAT_MUTANT_COUNT + 1] = {\n");
        let _ = writeln!(tables, "    {blank},");
        for (id, e) in &entries {
            let op = catalog.lookup(*id).expect("catalogued id");
            let _ = writeln!(tables, "    /* {} {} */", id, op.label().replace("*/", "* /"));
            let _ = writeln!(tables, "    {},", e.initializer());
        }
        tables.push_str("};\n");
    }

    let mut source = String::new();
    source.push_str("/* Mutation probe runtime. Generated by damut gen-api; do not edit. */\n");
    source.push_str("#include \"api.h\"\n\n");
    let _ = writeln!(source, "#define DAMAT_GLOBAL_SEED 0x{:x}ULL", spec.global_seed);
    let _ = writeln!(source, "#define DAMAT_MODEL_COUNT {}", spec.models.len());
    let _ = writeln!(source, "#define DAMAT_MAX_ITEM_BYTES {max_width}");
    if options.runtime_load {
        source.push_str("#define DAMAT_RUNTIME_LOAD 1\n");
    }
    source.push('\n');
    source.push_str(&RUNTIME.replace(TABLES_MARKER, tables.trim_end()));
    for (index, model) in spec.models.iter().enumerate() {
        let _ = write!(
            source,
            "\nint {}(unsigned char *buffer, size_t length, const char *test_id)\n{{\n    return damat_mutate({index}UL, buffer, length, test_id);\n}}\n",
            function_name(&model.name)
        );
    }

    let table = options.runtime_load.then(|| {
        let mut text = format!("damat-table 1 {}\n", catalog.mutant_count());
        for (id, e) in &entries {
            let words: Vec<String> = e.words(*id).iter().map(|w| format!("{w:x}")).collect();
            text.push_str(&words.join(" "));
            text.push('\n');
        }
        text
    });

    let manifest = Manifest {
        global_seed: spec.global_seed,
        mutant_count: catalog.mutant_count(),
        fault_models: spec
            .models
            .iter()
            .map(|m| ManifestModel {
                name: m.name.clone(),
                function: function_name(&m.name),
                buffer_len: m.buffer_len(),
                endianness: m.endianness,
            })
            .collect(),
        mutants: catalog
            .iter()
            .map(|op| ManifestEntry {
                mutant_id: op.id,
                fault_model: op.fault_model.clone(),
                row_index: op.row_index,
                operator: op.operator,
                procedure_index: op.procedure_index,
                position: op.row.position,
                span: op.row.span,
            })
            .collect(),
    };
    Ok(GeneratedApi {
        header,
        source,
        manifest,
        table,
    })
}
