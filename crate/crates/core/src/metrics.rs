//! Fault-model coverage (FMC), mutation-operation coverage (MOC), mutation
//! score (MS), and shortcoming classification.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{Catalog, MutantId};
use crate::faultmodel::{FaultModelSpec, OperatorKind};
use crate::orchestrator::{CoverageMap, MutantRun, RunArtifacts};

/// A percentage held as integer hundredths, rounded half-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(u64);

impl Percent {
    /// `100·num/den` to two decimals; `None` when `den` is zero.
    pub fn ratio(num: u64, den: u64) -> Option<Percent> {
        let (num, den) = (u128::from(num), u128::from(den));
        (den > 0).then(|| Percent(((20_000 * num + den) / (2 * den)) as u64))
    }

    pub fn from_hundredths(hundredths: u64) -> Self {
        Percent(hundredths)
    }

    pub fn hundredths(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl std::str::FromStr for Percent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid percentage {s:?}");
        let (whole, frac) = s.split_once('.').ok_or_else(bad)?;
        if frac.len() != 2 {
            return Err(bad());
        }
        let whole: u64 = whole.parse().map_err(|_| bad())?;
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        Ok(Percent(whole * 100 + frac))
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn ratio(num: usize, den: usize) -> Option<Percent> {
    Percent::ratio(num as u64, den as u64)
}

/// The six counts behind the three metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricCounts {
    pub n_fm: usize,
    pub n_fm_covered: usize,
    pub n_mo_cfm: usize,
    pub n_cmo: usize,
    pub killed: usize,
    pub live: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub fmc: Option<Percent>,
    pub moc: Option<Percent>,
    pub ms: Option<Percent>,
}

impl MetricCounts {
    pub fn metrics(&self) -> Metrics {
        Metrics {
            fmc: ratio(self.n_fm_covered, self.n_fm),
            moc: ratio(self.n_cmo, self.n_mo_cfm),
            ms: ratio(self.killed, self.killed + self.live),
        }
    }
}

/// Covered fault models and FMC.
pub fn fault_model_coverage(map: &CoverageMap, spec: &FaultModelSpec) -> (usize, Option<Percent>) {
    let covered = spec.models.iter().filter(|m| map.covers(&m.name)).count();
    (covered, ratio(covered, spec.models.len()))
}

/// Operations in covered fault models, those applied at least once, and MOC.
pub fn mutation_operation_coverage(
    catalog: &Catalog,
    covered_fms: &BTreeSet<&str>,
    applied: &BTreeSet<MutantId>,
) -> (usize, usize, Option<Percent>) {
    let in_covered: Vec<_> = catalog
        .iter()
        .filter(|op| covered_fms.contains(op.fault_model.as_str()))
        .collect();
    let n_cmo = in_covered.iter().filter(|op| applied.contains(&op.id)).count();
    (in_covered.len(), n_cmo, ratio(n_cmo, in_covered.len()))
}

/// Killed and live counts over mutants that applied their operation, and MS.
pub fn mutation_score(runs: &[MutantRun]) -> (usize, usize, Option<Percent>) {
    let eligible: Vec<_> = runs.iter().filter(|r| r.applied).collect();
    let killed = eligible.iter().filter(|r| r.killed_by().is_some()).count();
    let live = eligible.len() - killed;
    (killed, live, ratio(killed, eligible.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MutantStatus {
    Killed,
    Live,
    NotApplied,
    UncoveredFm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShortcomingKind {
    /// Untested message type.
    #[serde(rename = "UMT")]
    Umt,
    /// Uncovered input partition.
    #[serde(rename = "UIP")]
    Uip,
    /// Poor oracle quality or lack of test inputs; needs human triage.
    #[serde(rename = "POQ/LTI")]
    PoqLti,
}

impl ShortcomingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ShortcomingKind::Umt => "UMT",
            ShortcomingKind::Uip => "UIP",
            ShortcomingKind::PoqLti => "POQ/LTI",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortcoming {
    pub kind: ShortcomingKind,
    pub fault_model: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mutant: Option<MutantId>,
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantDetail {
    pub mutant: MutantId,
    pub fault_model: String,
    pub row_index: usize,
    pub operator: OperatorKind,
    pub procedure_index: u8,
    pub status: MutantStatus,
    pub tests_run: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub killed_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub subject: String,
    pub n_fm: usize,
    pub n_fm_covered: usize,
    pub fmc: Option<Percent>,
    pub n_mo_cfm: usize,
    pub n_cmo: usize,
    pub moc: Option<Percent>,
    pub killed: usize,
    pub live: usize,
    pub ms: Option<Percent>,
    pub mutants: Vec<MutantDetail>,
    pub shortcomings: Vec<Shortcoming>,
}

impl AnalysisReport {
    pub fn counts(&self) -> MetricCounts {
        MetricCounts {
            n_fm: self.n_fm,
            n_fm_covered: self.n_fm_covered,
            n_mo_cfm: self.n_mo_cfm,
            n_cmo: self.n_cmo,
            killed: self.killed,
            live: self.live,
        }
    }

    pub fn shortcoming_count(&self, kind: ShortcomingKind) -> usize {
        self.shortcomings.iter().filter(|s| s.kind == kind).count()
    }
}

/// Each uncovered fault model is a UMT, each unapplied operation in a covered
/// fault model a UIP, each live mutant a POQ/LTI candidate.
pub fn classify_shortcomings(
    spec: &FaultModelSpec,
    map: &CoverageMap,
    details: &[MutantDetail],
    catalog: &Catalog,
) -> Vec<Shortcoming> {
    let mut out = Vec::new();
    for model in &spec.models {
        if !map.covers(&model.name) {
            out.push(Shortcoming {
                kind: ShortcomingKind::Umt,
                fault_model: model.name.clone(),
                mutant: None,
                subject: format!("fault model {} is not exercised by any test", model.name),
            });
        }
    }
    for detail in details {
        let kind = match detail.status {
            MutantStatus::NotApplied => ShortcomingKind::Uip,
            MutantStatus::Live => ShortcomingKind::PoqLti,
            _ => continue,
        };
        let label = catalog
            .lookup(detail.mutant)
            .map(|op| op.label())
            .unwrap_or_else(|_| detail.mutant.to_string());
        let subject = match kind {
            ShortcomingKind::Uip => format!("operation {label} was never applied"),
            _ => format!("mutant {} ({label}) survived", detail.mutant),
        };
        out.push(Shortcoming {
            kind,
            fault_model: detail.fault_model.clone(),
            mutant: Some(detail.mutant),
            subject,
        });
    }
    out
}

/// Computes the full report from coverage and per-mutant runs.
pub fn analyze_runs(
    subject: &str,
    spec: &FaultModelSpec,
    map: &CoverageMap,
    runs: &[MutantRun],
) -> AnalysisReport {
    let catalog = Catalog::new(spec);
    let (n_fm_covered, fmc) = fault_model_coverage(map, spec);
    let covered = map.covered_models();
    let applied: BTreeSet<MutantId> = runs.iter().filter(|r| r.applied).map(|r| r.mutant).collect();
    let (n_mo_cfm, n_cmo, moc) = mutation_operation_coverage(&catalog, &covered, &applied);
    let (killed, live, ms) = mutation_score(runs);

    let details: Vec<MutantDetail> = catalog
        .iter()
        .map(|op| {
            let run = runs.iter().find(|r| r.mutant == op.id);
            let killed_by = run.and_then(|r| r.killed_by()).map(|o| o.test_id.clone());
            let status = if !covered.contains(op.fault_model.as_str()) {
                MutantStatus::UncoveredFm
            } else if !run.is_some_and(|r| r.applied) {
                MutantStatus::NotApplied
            } else if killed_by.is_some() {
                MutantStatus::Killed
            } else {
                MutantStatus::Live
            };
            MutantDetail {
                mutant: op.id,
                fault_model: op.fault_model.clone(),
                row_index: op.row_index,
                operator: op.operator,
                procedure_index: op.procedure_index,
                status,
                tests_run: run.map_or(0, |r| r.outcomes.len()),
                killed_by: if status == MutantStatus::Killed { killed_by } else { None },
            }
        })
        .collect();
    let shortcomings = classify_shortcomings(spec, map, &details, &catalog);
    AnalysisReport {
        subject: subject.to_string(),
        n_fm: spec.models.len(),
        n_fm_covered,
        fmc,
        n_mo_cfm,
        n_cmo,
        moc,
        killed,
        live,
        ms,
        mutants: details,
        shortcomings,
    }
}

pub fn analyze(subject: &str, artifacts: &RunArtifacts) -> AnalysisReport {
    analyze_runs(subject, &artifacts.spec, &artifacts.coverage, &artifacts.mutants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

fn shown(p: Option<Percent>) -> String {
    p.map_or_else(|| "N/A".to_string(), |p| format!("{p}%"))
}

pub const MARKDOWN_HEADER: &str =
    "| Subject | # FMs | FMC | #MOs-CFM | #CMOs | MOC | Killed | Live | MS |\n|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";

/// One table row, e.g. `| PDHU | 3 | 100.00% | 29 | 24 | 82.76% | 24 | 0 | 100.00% |`.
pub fn markdown_row(subject: &str, counts: &MetricCounts) -> String {
    let m = counts.metrics();
    format!(
        "| {subject} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
        counts.n_fm,
        shown(m.fmc),
        counts.n_mo_cfm,
        counts.n_cmo,
        shown(m.moc),
        counts.killed,
        counts.live,
        shown(m.ms),
    )
}

pub fn emit_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        ReportFormat::Markdown => {
            let mut out = String::from(MARKDOWN_HEADER);
            out.push_str(&markdown_row(&report.subject, &report.counts()));
            if !report.shortcomings.is_empty() {
                out.push_str("\n| Kind | Fault model | Subject |\n|---|---|---|\n");
                for s in &report.shortcomings {
                    let _ = writeln!(out, "| {} | {} | {} |", s.kind.as_str(), s.fault_model, s.subject);
                }
            }
            out
        }
    }
}
