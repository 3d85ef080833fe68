//! Runs a test suite against the coverage mutant and every enumerated mutant.
//!
//! Run directory layout:
//!
//! ```text
//! <stamp>/
//!   run.json  spec.csv  spec.cfg  suite.json
//!   coverage/<test>/{stdout,stderr,app.log,outcome.json}
//!   coverage.json
//!   mutant-<id>/<test>/{stdout,stderr,app.log,outcome.json}
//!   outcomes.json
//!   application.log          merged mutant logs, by mutant id then test
//! ```

mod process;
mod suite;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use process::{run as run_process, Invocation, ProcessResult, Verdict};
pub use suite::{Suite, TestCase};

use crate::catalog::{Catalog, MutantId, MutationOperation};
use crate::engine::{read_log, ApplicationRecord, LogReadError, RecordKind};
use crate::faultmodel::{emit_csv, emit_sidecar, load_spec, read_text, FaultModelSpec, SpecError};
use crate::probe;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("suite: {0}")]
    Suite(String),
    #[error("cannot start test {test}: {source}")]
    SuiteSetup {
        test: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Artifact { path: String, message: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Log(#[from] LogReadError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OrchestratorError + '_ {
    move |source| OrchestratorError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), OrchestratorError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OrchestratorError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_file(path, text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, OrchestratorError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| OrchestratorError::Artifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Result of one test execution under one mutant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub mutant: MutantId,
    pub test_id: String,
    pub verdict: Verdict,
    pub duration_ms: u64,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    /// Application log, relative to the run directory.
    pub log_path: String,
}

/// Fault models exercised by each test, in suite order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageMap {
    pub tests: Vec<CoverageEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub test_id: String,
    pub fault_models: BTreeSet<String>,
}

impl CoverageMap {
    /// Builds the map from coverage records; tests without records cover nothing.
    pub fn from_records<'a>(
        test_ids: impl IntoIterator<Item = &'a str>,
        records: &[ApplicationRecord],
    ) -> Self {
        let mut by_test: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for record in records.iter().filter(|r| r.kind == RecordKind::Coverage) {
            by_test
                .entry(record.test_id.as_str())
                .or_default()
                .insert(record.fault_model.clone());
        }
        Self {
            tests: test_ids
                .into_iter()
                .map(|id| CoverageEntry {
                    test_id: id.to_string(),
                    fault_models: by_test.remove(id).unwrap_or_default(),
                })
                .collect(),
        }
    }

    pub fn covered_models(&self) -> BTreeSet<&str> {
        self.tests
            .iter()
            .flat_map(|e| e.fault_models.iter().map(String::as_str))
            .collect()
    }

    pub fn covers(&self, fault_model: &str) -> bool {
        self.tests.iter().any(|e| e.fault_models.contains(fault_model))
    }

    pub fn tests_covering(&self, fault_model: &str) -> Vec<&str> {
        self.tests
            .iter()
            .filter(|e| e.fault_models.contains(fault_model))
            .map(|e| e.test_id.as_str())
            .collect()
    }
}

/// Tests whose coverage includes the operation's fault model, in suite order.
pub fn select_tests<'s>(
    suite: &'s Suite,
    map: &CoverageMap,
    op: &MutationOperation,
) -> Vec<&'s TestCase> {
    let covering: BTreeSet<&str> = map.tests_covering(&op.fault_model).into_iter().collect();
    suite
        .tests
        .iter()
        .filter(|t| covering.contains(t.id.as_str()))
        .collect()
}

/// Everything about one mutant's execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantRun {
    pub mutant: MutantId,
    pub fault_model: String,
    pub selected: Vec<String>,
    /// Whether any executed test logged an applied mutation.
    pub applied: bool,
    pub outcomes: Vec<RunOutcome>,
}

impl MutantRun {
    pub fn killed_by(&self) -> Option<&RunOutcome> {
        self.outcomes.iter().find(|o| o.verdict.is_failure())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub stamp: String,
    pub seed: u64,
    pub jobs: usize,
    pub spec_source: String,
    pub sidecar_source: String,
    pub suite_source: String,
    pub mutant_count: usize,
}

/// Paths and settings shared by every test execution of one run.
pub struct Workspace {
    pub dir: PathBuf,
    pub seed: u64,
}

impl Workspace {
    fn spec_csv(&self) -> PathBuf {
        self.dir.join("spec.csv")
    }

    fn spec_cfg(&self) -> PathBuf {
        self.dir.join("spec.cfg")
    }

    fn execute_test(
        &self,
        test: &TestCase,
        mutant: MutantId,
        group: &str,
    ) -> Result<RunOutcome, (RunOutcome, std::io::Error)> {
        let rel = format!("{group}/{}", test.id);
        let out_dir = self.dir.join(&rel);
        let log_rel = format!("{rel}/app.log");
        let log_path = self.dir.join(&log_rel);
        let failed = |source: std::io::Error| {
            let outcome = RunOutcome {
                mutant,
                test_id: test.id.clone(),
                verdict: Verdict::Crash,
                duration_ms: 0,
                exit_code: None,
                signal: None,
                log_path: log_rel.clone(),
            };
            (outcome, source)
        };
        fs::create_dir_all(&out_dir).map_err(failed)?;
        let mut env = test.env.clone();
        env.insert(probe::ENV_MUTANT_ID.into(), mutant.to_string());
        env.insert(probe::ENV_SPEC.into(), self.spec_csv().display().to_string());
        env.insert(probe::ENV_SIDECAR.into(), self.spec_cfg().display().to_string());
        env.insert(probe::ENV_SEED.into(), self.seed.to_string());
        env.insert(probe::ENV_TEST_ID.into(), test.id.clone());
        env.insert(probe::ENV_LOG.into(), log_path.display().to_string());
        let cwd = test.cwd.clone().unwrap_or_else(|| out_dir.clone());
        let result = run_process(&Invocation {
            cmd: &test.cmd,
            cwd: &cwd,
            env: &env,
            timeout: Duration::from_secs_f64(test.timeout_s),
            stdout: &out_dir.join("stdout"),
            stderr: &out_dir.join("stderr"),
        });
        let outcome = match result {
            Ok(r) => RunOutcome {
                mutant,
                test_id: test.id.clone(),
                verdict: r.verdict,
                duration_ms: r.duration.as_millis() as u64,
                exit_code: r.exit_code,
                signal: r.signal,
                log_path: log_rel.clone(),
            },
            Err(source) => {
                let (outcome, source) = failed(source);
                let _ = fs::write(out_dir.join("stderr"), format!("spawn failed: {source}\n"));
                let _ = write_json(&out_dir.join("outcome.json"), &outcome);
                return Err((outcome, source));
            }
        };
        write_json(&out_dir.join("outcome.json"), &outcome)
            .map_err(|e| failed(std::io::Error::other(e.to_string())))?;
        Ok(outcome)
    }

    fn records(&self, outcome: &RunOutcome) -> Result<Vec<ApplicationRecord>, OrchestratorError> {
        Ok(read_log(&self.dir.join(&outcome.log_path))?)
    }
}

/// Executes every test once under the coverage mutant.
pub fn run_coverage(
    ws: &Workspace,
    suite: &Suite,
) -> Result<(CoverageMap, Vec<RunOutcome>), OrchestratorError> {
    let mut outcomes = Vec::new();
    let mut records = Vec::new();
    for test in &suite.tests {
        let outcome = ws
            .execute_test(test, MutantId::COVERAGE, "coverage")
            .map_err(|(_, source)| OrchestratorError::SuiteSetup {
                test: test.id.clone(),
                source,
            })?;
        records.extend(ws.records(&outcome)?);
        outcomes.push(outcome);
    }
    let map = CoverageMap::from_records(suite.tests.iter().map(|t| t.id.as_str()), &records);
    Ok((map, outcomes))
}

fn mutation_applied(records: &[ApplicationRecord], mutant: MutantId) -> bool {
    records
        .iter()
        .any(|r| r.kind == RecordKind::Mutation && r.mutant_id == mutant && r.applied)
}

/// Runs one mutant over its selected tests, stopping at the first failure.
pub fn run_mutant(
    ws: &Workspace,
    suite: &Suite,
    map: &CoverageMap,
    op: &MutationOperation,
) -> Result<MutantRun, OrchestratorError> {
    let selected = select_tests(suite, map, op);
    let group = format!("mutant-{}", op.id);
    let mut outcomes = Vec::new();
    let mut applied = false;
    for test in &selected {
        let outcome = match ws.execute_test(test, op.id, &group) {
            Ok(outcome) => outcome,
            Err((outcome, _)) => outcome,
        };
        applied |= mutation_applied(&ws.records(&outcome)?, op.id);
        let stop = outcome.verdict.is_failure();
        outcomes.push(outcome);
        if stop {
            break;
        }
    }
    Ok(MutantRun {
        mutant: op.id,
        fault_model: op.fault_model.clone(),
        selected: selected.iter().map(|t| t.id.clone()).collect(),
        applied,
        outcomes,
    })
}

/// Runs every mutant, `jobs` at a time; results are in mutant-id order.
pub fn run_matrix(
    ws: &Workspace,
    suite: &Suite,
    catalog: &Catalog,
    map: &CoverageMap,
    jobs: usize,
) -> Result<Vec<MutantRun>, OrchestratorError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| OrchestratorError::Suite(format!("worker pool: {e}")))?;
    pool.install(|| {
        catalog
            .operations()
            .par_iter()
            .map(|op| run_mutant(ws, suite, map, op))
            .collect()
    })
}

pub struct RunConfig {
    pub spec_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub suite_path: PathBuf,
    /// Overrides the seed from the model configuration.
    pub seed: Option<u64>,
    pub jobs: usize,
    pub runs_root: PathBuf,
    /// Run directory name; defaults to a timestamp.
    pub stamp: Option<String>,
}

fn default_stamp() -> String {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    format!("{}-{:09}-{}", now.as_secs(), now.subsec_nanos(), std::process::id())
}

/// A completed (or reloaded) run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub info: RunInfo,
    pub spec: FaultModelSpec,
    pub suite: Suite,
    pub coverage: CoverageMap,
    pub coverage_outcomes: Vec<RunOutcome>,
    pub mutants: Vec<MutantRun>,
}

impl RunArtifacts {
    pub fn catalog(&self) -> Catalog {
        Catalog::new(&self.spec)
    }

    /// Verdicts in mutant-id then test order.
    pub fn verdict_vector(&self) -> Vec<(MutantId, String, Verdict)> {
        self.mutants
            .iter()
            .flat_map(|m| {
                m.outcomes
                    .iter()
                    .map(move |o| (m.mutant, o.test_id.clone(), o.verdict))
            })
            .collect()
    }

    pub fn merged_log_path(&self) -> PathBuf {
        self.dir.join("application.log")
    }

    /// Rebuilds a run from disk, recomputing coverage and application
    /// status from the per-test logs.
    pub fn load(dir: &Path) -> Result<Self, OrchestratorError> {
        let info: RunInfo = read_json(&dir.join("run.json"))?;
        let spec_csv = read_text(&dir.join("spec.csv"))?;
        let spec_cfg = read_text(&dir.join("spec.cfg"))?;
        let mut spec = load_spec(&spec_csv, &spec_cfg)?;
        spec.source_path = info.spec_source.clone();
        let suite_path = dir.join("suite.json");
        let suite = Suite::parse(&fs::read_to_string(&suite_path).map_err(io_err(&suite_path))?)?;
        let ws = Workspace {
            dir: dir.to_path_buf(),
            seed: info.seed,
        };

        let coverage_outcomes: Vec<RunOutcome> = suite
            .tests
            .iter()
            .map(|t| read_json(&dir.join("coverage").join(&t.id).join("outcome.json")))
            .collect::<Result<_, _>>()?;
        let mut records = Vec::new();
        for outcome in &coverage_outcomes {
            records.extend(ws.records(outcome)?);
        }
        let coverage = CoverageMap::from_records(suite.tests.iter().map(|t| t.id.as_str()), &records);

        let mut mutants: Vec<MutantRun> = read_json(&dir.join("outcomes.json"))?;
        for run in &mut mutants {
            let mut applied = false;
            for outcome in &run.outcomes {
                applied |= mutation_applied(&ws.records(outcome)?, run.mutant);
            }
            run.applied = applied;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            info,
            spec,
            suite,
            coverage,
            coverage_outcomes,
            mutants,
        })
    }
}

/// Full pipeline: prepare the run directory, run coverage, run the matrix,
/// persist outcomes and the merged application log.
pub fn execute(config: &RunConfig) -> Result<RunArtifacts, OrchestratorError> {
    let spec_text = read_text(&config.spec_path)?;
    let sidecar_text = read_text(&config.sidecar_path)?;
    let mut spec = load_spec(&spec_text, &sidecar_text)?;
    spec.source_path = config.spec_path.display().to_string();
    if let Some(seed) = config.seed {
        spec.global_seed = seed;
    }
    let suite = Suite::load(&config.suite_path)?;
    let catalog = Catalog::new(&spec);

    let stamp = config.stamp.clone().unwrap_or_else(default_stamp);
    let dir = config.runs_root.join(&stamp);
    if dir.exists() {
        return Err(OrchestratorError::Suite(format!(
            "run directory {} already exists",
            dir.display()
        )));
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let dir = fs::canonicalize(&dir).map_err(io_err(&dir))?;
    let info = RunInfo {
        stamp,
        seed: spec.global_seed,
        jobs: config.jobs.max(1),
        spec_source: config.spec_path.display().to_string(),
        sidecar_source: config.sidecar_path.display().to_string(),
        suite_source: config.suite_path.display().to_string(),
        mutant_count: catalog.mutant_count(),
    };
    write_json(&dir.join("run.json"), &info)?;
    write_file(&dir.join("spec.csv"), emit_csv(&spec))?;
    write_file(&dir.join("spec.cfg"), emit_sidecar(&spec))?;
    write_file(&dir.join("suite.json"), suite.to_json())?;

    let ws = Workspace {
        dir: dir.clone(),
        seed: spec.global_seed,
    };
    let (coverage, coverage_outcomes) = run_coverage(&ws, &suite)?;
    write_json(&dir.join("coverage.json"), &coverage)?;
    let mutants = run_matrix(&ws, &suite, &catalog, &coverage, config.jobs)?;
    write_json(&dir.join("outcomes.json"), &mutants)?;

    let mut merged = String::new();
    for run in &mutants {
        for outcome in &run.outcomes {
            for record in ws.records(outcome)? {
                merged.push_str(&record.to_line());
            }
        }
    }
    write_file(&dir.join("application.log"), merged)?;

    Ok(RunArtifacts {
        dir,
        info,
        spec,
        suite,
        coverage,
        coverage_outcomes,
        mutants,
    })
}
