//! Data-driven mutation analysis for message-passing systems.
//!
//! Tabular fault models describe how data items inside exchanged buffers may
//! be corrupted. From them the crate enumerates mutants, applies one mutation
//! operation per run at probe sites, drives a test suite against every
//! mutant, and reports fault-model coverage, mutation-operation coverage, and
//! mutation score.

pub mod catalog;
pub mod codec;
pub mod codegen;
pub mod engine;
pub mod faultmodel;
pub mod metrics;
pub mod orchestrator;
pub mod probe;
pub mod rng;
