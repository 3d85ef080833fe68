use std::collections::HashMap;
use std::path::Path;

use damut_core::engine::{parse_log, ProbeEffect, RecordKind};
use damut_core::probe::{parse_u64, Probe, ProbeError, EXIT_LOG_FAILURE, EXIT_PROBE_FAILURE};

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel).display().to_string()
}

fn probe(vars: &[(&str, String)]) -> Result<Probe, ProbeError> {
    let env: HashMap<String, String> = vars.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    Probe::from_vars(|name| env.get(name).cloned())
}

fn demo_env(id: &str, log: &Path) -> Vec<(&'static str, String)> {
    vec![
        ("DAMAT_MUTANT_ID", id.to_string()),
        ("DAMAT_SPEC", fixture("demo/demo.csv")),
        ("DAMAT_SIDECAR", fixture("demo/demo.cfg")),
        ("DAMAT_TEST_ID", "t\"1".to_string()),
        ("DAMAT_LOG", log.display().to_string()),
    ]
}

#[test]
fn unset_id_is_inert() {
    let mut p = probe(&[]).unwrap();
    assert!(p.is_inert());
    let mut buf = [1u8, 2, 3];
    assert_eq!(p.mutate("anything", &mut buf).unwrap(), ProbeEffect::Untargeted);
    assert_eq!(buf, [1, 2, 3]);
}

#[test]
fn configuration_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("app.log");
    let with = |id: &str, extra: &[(&'static str, &str)]| {
        let mut env = demo_env(id, &log);
        env.extend(extra.iter().map(|(k, v)| (*k, v.to_string())));
        probe(&env)
    };
    let code = |r: Result<Probe, ProbeError>| r.err().map(|e| e.exit_code());
    assert_eq!(code(with("x", &[])), Some(EXIT_PROBE_FAILURE));
    assert_eq!(code(with("999", &[])), Some(EXIT_PROBE_FAILURE));
    assert_eq!(code(with("1", &[("DAMAT_SEED", "0xZZ")])), Some(EXIT_PROBE_FAILURE));
    assert_eq!(code(with("1", &[("DAMAT_LOG", "/nonexistent/dir/app.log")])), Some(EXIT_LOG_FAILURE));
    assert_eq!(code(probe(&[("DAMAT_MUTANT_ID", "1".into())])), Some(EXIT_PROBE_FAILURE));
    let mut p = with("1", &[]).unwrap();
    let err = p.mutate("NoSuchModel", &mut [0u8; 4]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_PROBE_FAILURE);
    let err = p.mutate("IfHK", &mut [0u8; 3]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_PROBE_FAILURE);
}

#[test]
fn seeds_parse_decimal_and_hex() {
    assert_eq!(parse_u64("42"), Some(42));
    assert_eq!(parse_u64(" 0x2A "), Some(42));
    assert_eq!(parse_u64("0XdeadBEEF"), Some(0xDEAD_BEEF));
    assert_eq!(parse_u64("-1"), None);
    assert_eq!(parse_u64("18446744073709551616"), None);
}

#[test]
fn log_lines_have_fixed_field_order() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("app.log");
    // Mutant 1 is VAT on volt (scale 0.01): 2000 is below 33.53 and becomes 3354.
    let mut p = probe(&demo_env("1", &log)).unwrap();
    let mut hk = [0u8; 16];
    hk[0..2].copy_from_slice(&2000i16.to_le_bytes());
    assert_eq!(p.mutate("IfHK", &mut hk).unwrap(), ProbeEffect::Mutation { applied: true, clamped: false });
    assert_eq!(i16::from_le_bytes([hk[0], hk[1]]), 3354);
    assert_eq!(p.mutate("IfStatus", &mut [0u8; 2]).unwrap(), ProbeEffect::Untargeted);
    drop(p);
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(
        text,
        "{\"sequence_no\":0,\"kind\":\"mutation\",\"test_id\":\"t\\\"1\",\"fault_model\":\"IfHK\",\"mutant_id\":1,\
         \"row_index\":1,\"procedure_index\":0,\"applied\":true,\"clamped\":false,\
         \"original_bytes\":\"d007\",\"mutated_bytes\":\"1a0d\"}\n"
    );

    let cov = dir.path().join("cov.log");
    let mut p = probe(&demo_env("0", &cov)).unwrap();
    let mut st = [7u8, 9];
    assert_eq!(p.mutate("IfStatus", &mut st).unwrap(), ProbeEffect::Covered);
    assert_eq!(st, [7, 9]);
    drop(p);
    let records = parse_log(&std::fs::read_to_string(&cov).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].kind, RecordKind::Coverage);
    assert_eq!((records[0].row_index, records[0].applied), (None, false));
}
