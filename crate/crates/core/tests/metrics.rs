//! Coverage and score arithmetic on synthetic runs shaped like the published
//! subject results.

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;

use damut_core::catalog::{Catalog, MutantId};
use damut_core::faultmodel::{load_files, FaultModelSpec};
use damut_core::metrics::{
    analyze_runs, emit_report, markdown_row, MetricCounts, MutantStatus, Percent, ReportFormat, ShortcomingKind,
};
use damut_core::orchestrator::{CoverageEntry, CoverageMap, MutantRun, RunOutcome, Verdict};

fn fixture(name: &str) -> FaultModelSpec {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    load_files(&dir.join(format!("{name}.csv")), &dir.join(format!("{name}.cfg"))).unwrap()
}

fn outcome(mutant: MutantId, test: &str, verdict: Verdict) -> RunOutcome {
    RunOutcome {
        mutant,
        test_id: test.into(),
        verdict,
        duration_ms: 1,
        exit_code: Some(i32::from(verdict.is_failure())),
        signal: None,
        log_path: format!("mutant-{mutant}/{test}/app.log"),
    }
}

/// Covers every model except `uncovered`; of the covered operations the first
/// `applied` are applied and the first `killed` of those killed.
fn synthetic(spec: &FaultModelSpec, uncovered: &[&str], applied: usize, killed: usize) -> (CoverageMap, Vec<MutantRun>) {
    let covered: BTreeSet<String> =
        spec.models.iter().map(|m| m.name.clone()).filter(|n| !uncovered.contains(&n.as_str())).collect();
    let map = CoverageMap {
        tests: vec![
            CoverageEntry { test_id: "t1".into(), fault_models: covered.clone() },
            CoverageEntry { test_id: "t2".into(), fault_models: BTreeSet::new() },
        ],
    };
    let mut seen = 0;
    let runs = Catalog::new(spec)
        .iter()
        .map(|op| {
            if !covered.contains(&op.fault_model) {
                return MutantRun {
                    mutant: op.id,
                    fault_model: op.fault_model.clone(),
                    selected: vec![],
                    applied: false,
                    outcomes: vec![],
                };
            }
            seen += 1;
            let is_applied = seen <= applied;
            let verdict = if is_applied && seen <= killed { Verdict::Fail } else { Verdict::Pass };
            MutantRun {
                mutant: op.id,
                fault_model: op.fault_model.clone(),
                selected: vec!["t1".into()],
                applied: is_applied,
                outcomes: vec![outcome(op.id, "t1", verdict)],
            }
        })
        .collect();
    (map, runs)
}

#[test]
fn adcs_shaped_run() {
    let spec = fixture("adcs/adcs");
    let (map, runs) = synthetic(&spec, &["FM10"], 100, 45);
    let report = analyze_runs("ADCS", &spec, &map, &runs);
    let c = report.counts();
    assert_eq!((c.n_fm, c.n_fm_covered, c.n_mo_cfm, c.n_cmo, c.killed, c.live), (10, 9, 135, 100, 45, 55));
    assert_eq!(report.fmc.unwrap().to_string(), "90.00");
    assert_eq!(report.moc.unwrap().to_string(), "74.07");
    assert_eq!(report.ms.unwrap().to_string(), "45.00");
    assert_eq!(report.shortcoming_count(ShortcomingKind::Umt), 1);
    assert_eq!(report.shortcoming_count(ShortcomingKind::Uip), 35);
    assert_eq!(report.shortcoming_count(ShortcomingKind::PoqLti), 55);
    let uncovered = report.mutants.iter().filter(|m| m.status == MutantStatus::UncoveredFm).count();
    assert_eq!(uncovered, 37);
    let umt = report.shortcomings.iter().find(|s| s.kind == ShortcomingKind::Umt).unwrap();
    assert_eq!(umt.fault_model, "FM10");
    assert!(umt.mutant.is_none());
}

#[test]
fn libp_shaped_run() {
    let spec = fixture("libp/libp");
    let (map, runs) = synthetic(&spec, &[], 41, 37);
    let report = analyze_runs("LIBP", &spec, &map, &runs);
    assert_eq!(
        markdown_row("LIBP", &report.counts()),
        "| LIBP | 6 | 100.00% | 44 | 41 | 93.18% | 37 | 4 | 90.24% |\n"
    );
    assert_eq!(report.shortcoming_count(ShortcomingKind::Umt), 0);
    assert_eq!(report.shortcoming_count(ShortcomingKind::Uip), 3);
    assert_eq!(report.shortcoming_count(ShortcomingKind::PoqLti), 4);
    let killed: Vec<_> = report.mutants.iter().filter_map(|m| m.killed_by.as_deref()).collect();
    assert_eq!(killed.len(), 37);
    assert!(killed.iter().all(|t| *t == "t1"));
}

#[test]
fn small_subjects_from_counts() {
    let gps = MetricCounts { n_fm: 1, n_fm_covered: 1, n_mo_cfm: 23, n_cmo: 22, killed: 21, live: 1 }.metrics();
    assert_eq!([gps.fmc, gps.moc, gps.ms].map(|p| p.unwrap().to_string()), ["100.00", "95.65", "95.45"]);
    let pdhu = MetricCounts { n_fm: 3, n_fm_covered: 3, n_mo_cfm: 29, n_cmo: 24, killed: 24, live: 0 }.metrics();
    assert_eq!([pdhu.fmc, pdhu.moc, pdhu.ms].map(|p| p.unwrap().to_string()), ["100.00", "82.76", "100.00"]);
}

#[test]
fn nothing_covered_gives_not_applicable() {
    let spec = fixture("libp/libp");
    let names: Vec<&str> = spec.models.iter().map(|m| m.name.as_str()).collect();
    let (map, runs) = synthetic(&spec, &names, 0, 0);
    let report = analyze_runs("none", &spec, &map, &runs);
    assert_eq!(report.fmc.unwrap().to_string(), "0.00");
    assert_eq!((report.moc, report.ms), (None, None));
    assert_eq!(report.shortcoming_count(ShortcomingKind::Umt), 6);
    let md = emit_report(&report, ReportFormat::Markdown);
    assert!(md.contains("| none | 6 | 0.00% | 0 | 0 | N/A | 0 | 0 | N/A |"), "{md}");
    let json: serde_json::Value = serde_json::from_str(&emit_report(&report, ReportFormat::Json)).unwrap();
    assert_eq!(json["moc"], serde_json::Value::Null);
    assert_eq!(json["fmc"], "0.00");
}

#[test]
fn timeout_and_crash_kill() {
    let spec = fixture("libp/libp");
    let (map, mut runs) = synthetic(&spec, &[], 44, 0);
    runs[0].outcomes[0].verdict = Verdict::Timeout;
    runs[1].outcomes[0].verdict = Verdict::Crash;
    let report = analyze_runs("x", &spec, &map, &runs);
    assert_eq!((report.killed, report.live), (2, 42));
}

proptest! {
    /// Half-up rounding to hundredths: `h/100 ≤ 100·n/d + 1/200 < (h+1)/100`.
    #[test]
    fn percent_rounds_half_up(den in 1u64..100_000, frac in 0.0f64..=1.0) {
        let num = (frac * den as f64) as u64;
        let h = u128::from(Percent::ratio(num, den).unwrap().hundredths());
        let (n, d) = (u128::from(num), u128::from(den));
        prop_assert!(2 * d * h <= 20_000 * n + d);
        prop_assert!(20_000 * n + d < 2 * d * (h + 1));
        let shown = Percent::ratio(num, den).unwrap().to_string();
        prop_assert_eq!(shown.parse::<Percent>().unwrap().hundredths(), h as u64);
    }
}
