//! A small instrumented system under test.
//!
//! A producer emits housekeeping (`IfHK`, 16 bytes), status (`IfStatus`, 2
//! bytes) and attitude (`IfAtt`, 8 bytes, big-endian) messages; each passes
//! through the probe before a consumer decodes it and prints one line of
//! `key=value` fields.
//!
//! ```text
//! damut-mock-sut run  --scenario nominal [--no-probe]
//! damut-mock-sut test --scenario nominal --check power,seq,link
//! ```
//!
//! `test` compares the selected fields (or `all`) against an uninstrumented
//! in-process run and exits 0 when they agree, 1 otherwise.

use std::collections::BTreeSet;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use damut_core::probe::Probe;

const STEPS: u32 = 12;

#[derive(Parser)]
#[command(name = "damut-mock-sut")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    Run {
        #[arg(long, default_value = "nominal")]
        scenario: String,
        /// Skip the probe entirely (the uninstrumented build).
        #[arg(long)]
        no_probe: bool,
    },
    Test {
        #[arg(long, default_value = "nominal")]
        scenario: String,
        /// Comma-separated field names, or `all`.
        #[arg(long, default_value = "all")]
        check: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scenario {
    Nominal,
    LowVolt,
    HighVolt,
    Hot,
    Tumble,
    HkOnly,
}

impl Scenario {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "nominal" => Scenario::Nominal,
            "lowvolt" => Scenario::LowVolt,
            "highvolt" => Scenario::HighVolt,
            "hot" => Scenario::Hot,
            "tumble" => Scenario::Tumble,
            "hkonly" => Scenario::HkOnly,
            _ => bail!("unknown scenario {name:?}"),
        })
    }
}

enum Message {
    Hk([u8; 16]),
    Status([u8; 2]),
    Att([u8; 8]),
}

fn produce(scenario: Scenario, k: u32) -> Vec<Message> {
    let kf = f64::from(k);
    let volt_centi: i16 = match scenario {
        Scenario::LowVolt => 2200 + 30 * k as i16,
        Scenario::HighVolt => 3300 + 10 * k as i16,
        _ => 2800 + 75 * (k % 5) as i16,
    };
    let (t1, t2): (i16, i16) = match scenario {
        Scenario::Hot => (450 + 20 * k as i16, 480 + 5 * k as i16),
        _ => (150 + 20 * k as i16, 200 - 30 * k as i16),
    };
    let mut hk = [0u8; 16];
    hk[0..2].copy_from_slice(&volt_centi.to_le_bytes());
    hk[2..4].copy_from_slice(&(400 + 13 * k as i16).to_le_bytes());
    hk[4] = 0b0001_0110u8.rotate_left(k);
    hk[5] = (k % 4) as u8;
    hk[6..8].copy_from_slice(&(100 + k as i16).to_le_bytes());
    hk[8..12].copy_from_slice(&(((kf - 6.0) * 0.5) as f32).to_le_bytes());
    hk[12..14].copy_from_slice(&t1.to_le_bytes());
    hk[14..16].copy_from_slice(&t2.to_le_bytes());
    let mut out = vec![Message::Hk(hk)];
    if scenario == Scenario::HkOnly {
        return out;
    }
    let flags = (k % 2) as u8 | u8::from(k.is_multiple_of(3)) << 1;
    out.push(Message::Status([(k % 4) as u8, flags]));
    let rate = match scenario {
        Scenario::Tumble => 1.5 - 0.3 * kf,
        _ => (f64::from(k % 7) - 3.0) * 0.2,
    };
    out.push(Message::Att(rate.to_be_bytes()));
    out
}

#[derive(Default)]
struct Consumer {
    last_seq: Option<i16>,
}

type Fields = Vec<(&'static str, String)>;

impl Consumer {
    fn consume(&mut self, k: u32, message: &Message) -> (&'static str, Fields) {
        let step = ("step", k.to_string());
        match message {
            Message::Hk(b) => {
                let le = |i: usize| i16::from_le_bytes([b[i], b[i + 1]]);
                let volt = f64::from(le(0)) * 0.01;
                let current = le(2);
                let seq = le(6);
                let angle = f32::from_le_bytes([b[8], b[9], b[10], b[11]]);
                let (t1, t2) = (f64::from(le(12)) * 0.1, f64::from(le(14)) * 0.1);
                let power = if volt > 33.535 {
                    "HIGH"
                } else if volt < 23.995 {
                    "LOW"
                } else {
                    "OK"
                };
                let link = match self.last_seq {
                    Some(prev) if prev == seq => "STALE",
                    Some(prev) if prev.wrapping_add(1) != seq => "GAP",
                    _ => "OK",
                };
                self.last_seq = Some(seq);
                let thermal = if [t1, t2].iter().any(|t| !(-20.05..=50.05).contains(t)) {
                    "FAULT"
                } else {
                    "OK"
                };
                let fields = vec![
                    step,
                    ("volt", format!("{volt:.2}")),
                    ("power", power.into()),
                    ("current", current.to_string()),
                    ("sensor", if current == -1 { "INVALID" } else { "OK" }.into()),
                    ("status", format!("{:08b}", b[4])),
                    ("seq", seq.to_string()),
                    ("link", link.into()),
                    ("angle", format!("{angle:.3}")),
                    ("t1", format!("{t1:.1}")),
                    ("t2", format!("{t2:.1}")),
                    ("thermal", thermal.into()),
                ];
                ("hk", fields)
            }
            Message::Status(b) => {
                let mode = match b[0] {
                    0 => "SAFE",
                    1 => "NOMINAL",
                    2 => "SCIENCE",
                    3 => "DOWNLINK",
                    _ => "INVALID",
                };
                let fields = vec![
                    step,
                    ("mode", mode.into()),
                    ("heater", if b[1] & 1 != 0 { "ON" } else { "OFF" }.into()),
                ];
                ("st", fields)
            }
            Message::Att(b) => {
                let rate = f64::from_be_bytes(*b);
                let fields = vec![
                    step,
                    ("rate", format!("{rate:.3}")),
                    ("guard", if rate.abs() > 1.0 { "SAFE" } else { "OK" }.into()),
                ];
                ("att", fields)
            }
        }
    }
}

fn probe_message(probe: &mut Probe, message: &mut Message) {
    match message {
        Message::Hk(b) => probe.mutate_or_exit("IfHK", b),
        Message::Status(b) => probe.mutate_or_exit("IfStatus", b),
        Message::Att(b) => probe.mutate_or_exit("IfAtt", b),
    };
}

/// Runs the scenario, probing each message when a probe is given.
fn simulate(scenario: Scenario, mut probe: Option<&mut Probe>) -> Vec<(&'static str, Fields)> {
    let mut consumer = Consumer::default();
    let mut lines = Vec::new();
    for k in 0..STEPS {
        for mut message in produce(scenario, k) {
            if let Some(probe) = probe.as_deref_mut() {
                probe_message(probe, &mut message);
            }
            lines.push(consumer.consume(k, &message));
        }
    }
    lines
}

fn render(kind: &str, fields: &Fields) -> String {
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{kind} {}", body.join(" "))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("damut-mock-sut: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().mode {
        Mode::Run { scenario, no_probe } => {
            let scenario = Scenario::parse(&scenario)?;
            let lines = if no_probe {
                simulate(scenario, None)
            } else {
                simulate(scenario, Some(&mut Probe::from_env_or_exit()))
            };
            for (kind, fields) in &lines {
                println!("{}", render(kind, fields));
            }
            Ok(ExitCode::SUCCESS)
        }
        Mode::Test { scenario, check } => {
            let scenario = Scenario::parse(&scenario)?;
            let checked: Option<BTreeSet<&str>> =
                (check != "all").then(|| check.split(',').map(str::trim).collect());
            let expected = simulate(scenario, None);
            let actual = simulate(scenario, Some(&mut Probe::from_env_or_exit()));
            let keep = |fields: &Fields| -> Fields {
                fields
                    .iter()
                    .filter(|(k, _)| {
                        *k == "step" || checked.as_ref().is_none_or(|c| c.contains(k))
                    })
                    .cloned()
                    .collect()
            };
            let mut mismatches = 0;
            for ((kind, want), (_, got)) in expected.iter().zip(&actual) {
                let (want, got) = (keep(want), keep(got));
                if want != got {
                    mismatches += 1;
                    eprintln!("expected {}\n     got {}", render(kind, &want), render(kind, &got));
                }
            }
            if mismatches == 0 {
                println!("PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("FAIL ({mismatches} mismatching messages)");
                Ok(ExitCode::from(1))
            }
        }
    }
}
