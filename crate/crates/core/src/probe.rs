//! Environment-driven probe for Rust hosts.
//!
//! | variable         | meaning                                             |
//! |------------------|-----------------------------------------------------|
//! | `DAMAT_MUTANT_ID`| active mutant; `0` = coverage; unset = probe inert  |
//! | `DAMAT_SPEC`     | fault-model CSV path                                |
//! | `DAMAT_SIDECAR`  | model configuration path                            |
//! | `DAMAT_SEED`     | global seed (decimal or `0x` hex), overrides config |
//! | `DAMAT_TEST_ID`  | test identifier written to the log                  |
//! | `DAMAT_LOG`      | application log path; unset = no log                |

use std::path::Path;

use thiserror::Error;

use crate::catalog::{Catalog, MutantId};
use crate::engine::{mutate, EngineError, LogSink, MutationContext, ProbeEffect};
use crate::faultmodel::{load_files, FaultModelSpec, SpecError};

pub const ENV_MUTANT_ID: &str = "DAMAT_MUTANT_ID";
pub const ENV_SPEC: &str = "DAMAT_SPEC";
pub const ENV_SIDECAR: &str = "DAMAT_SIDECAR";
pub const ENV_SEED: &str = "DAMAT_SEED";
pub const ENV_TEST_ID: &str = "DAMAT_TEST_ID";
pub const ENV_LOG: &str = "DAMAT_LOG";

/// Process exit status when the application log cannot be written.
pub const EXIT_LOG_FAILURE: i32 = 86;
/// Process exit status for any other probe failure.
pub const EXIT_PROBE_FAILURE: i32 = 87;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("{var} is required when {ENV_MUTANT_ID} is set")]
    MissingEnv { var: &'static str },
    #[error("{var}={value:?} is not a valid unsigned integer")]
    BadEnv { var: &'static str, value: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no fault model named {0:?}")]
    UnknownModel(String),
    #[error("cannot open application log {path}: {source}")]
    LogOpen {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ProbeError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ProbeError::LogOpen { .. } | ProbeError::Engine(EngineError::Log(_)) => EXIT_LOG_FAILURE,
            _ => EXIT_PROBE_FAILURE,
        }
    }
}

pub fn parse_u64(text: &str) -> Option<u64> {
    let text = text.trim();
    match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => text.parse().ok(),
    }
}

#[derive(Debug)]
enum State {
    Inert,
    Active {
        spec: FaultModelSpec,
        ctx: Box<MutationContext>,
        test_id: String,
    },
}

#[derive(Debug)]
pub struct Probe {
    state: State,
}

impl Probe {
    pub fn inert() -> Self {
        Self { state: State::Inert }
    }

    pub fn new(
        spec: FaultModelSpec,
        mutant: MutantId,
        seed: u64,
        test_id: impl Into<String>,
        sink: LogSink,
    ) -> Result<Self, ProbeError> {
        let catalog = Catalog::new(&spec);
        let ctx = MutationContext::for_mutant(&catalog, mutant, seed, sink)?;
        Ok(Self {
            state: State::Active {
                spec,
                ctx: Box::new(ctx),
                test_id: test_id.into(),
            },
        })
    }

    pub fn from_env() -> Result<Self, ProbeError> {
        Self::from_vars(|name| std::env::var(name).ok())
    }

    /// Like [`Probe::from_env`] with an explicit variable lookup.
    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, ProbeError> {
        let Some(raw_id) = var(ENV_MUTANT_ID) else {
            return Ok(Self::inert());
        };
        let mutant = parse_u64(&raw_id)
            .and_then(|id| u32::try_from(id).ok())
            .map(MutantId)
            .ok_or(ProbeError::BadEnv {
                var: ENV_MUTANT_ID,
                value: raw_id.clone(),
            })?;
        let spec_path = var(ENV_SPEC).ok_or(ProbeError::MissingEnv { var: ENV_SPEC })?;
        let sidecar_path = var(ENV_SIDECAR).ok_or(ProbeError::MissingEnv { var: ENV_SIDECAR })?;
        let spec = load_files(Path::new(&spec_path), Path::new(&sidecar_path))?;
        let seed = match var(ENV_SEED) {
            Some(raw) => parse_u64(&raw).ok_or(ProbeError::BadEnv {
                var: ENV_SEED,
                value: raw,
            })?,
            None => spec.global_seed,
        };
        let sink = match var(ENV_LOG) {
            Some(path) => LogSink::append_to(&path).map_err(|source| ProbeError::LogOpen {
                path: path.clone(),
                source,
            })?,
            None => LogSink::Discard,
        };
        let test_id = var(ENV_TEST_ID).unwrap_or_default();
        Self::new(spec, mutant, seed, test_id, sink)
    }

    /// [`Probe::from_env`], exiting the process on configuration errors.
    pub fn from_env_or_exit() -> Self {
        Self::from_env().unwrap_or_else(|err| {
            eprintln!("damut probe: {err}");
            std::process::exit(err.exit_code())
        })
    }

    pub fn is_inert(&self) -> bool {
        matches!(self.state, State::Inert)
    }

    pub fn context(&self) -> Option<&MutationContext> {
        match &self.state {
            State::Inert => None,
            State::Active { ctx, .. } => Some(ctx),
        }
    }

    pub fn mutate(&mut self, model: &str, buffer: &mut [u8]) -> Result<ProbeEffect, ProbeError> {
        match &mut self.state {
            State::Inert => Ok(ProbeEffect::Untargeted),
            State::Active { spec, ctx, test_id } => {
                let model = spec
                    .model(model)
                    .ok_or_else(|| ProbeError::UnknownModel(model.to_string()))?;
                Ok(mutate(buffer, model, ctx, test_id)?)
            }
        }
    }

    /// [`Probe::mutate`], exiting with [`EXIT_LOG_FAILURE`] when logging fails.
    pub fn mutate_or_exit(&mut self, model: &str, buffer: &mut [u8]) -> ProbeEffect {
        self.mutate(model, buffer).unwrap_or_else(|err| {
            eprintln!("damut probe: {err}");
            std::process::exit(err.exit_code())
        })
    }
}
