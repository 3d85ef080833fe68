use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::os::unix::process::ExitStatusExt;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Timeout,
    Crash,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self != Verdict::Pass
    }

    pub fn from_status(status: ExitStatus) -> Self {
        match status.code() {
            Some(0) => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None => Verdict::Crash,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessResult {
    pub verdict: Verdict,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub duration: Duration,
}

pub struct Invocation<'a> {
    pub cmd: &'a [String],
    pub cwd: &'a Path,
    pub env: &'a BTreeMap<String, String>,
    pub timeout: Duration,
    pub stdout: &'a Path,
    pub stderr: &'a Path,
}

/// Runs one command to completion or until its deadline, then kills it.
pub fn run(inv: &Invocation<'_>) -> io::Result<ProcessResult> {
    let started = Instant::now();
    let mut child = Command::new(&inv.cmd[0])
        .args(&inv.cmd[1..])
        .current_dir(inv.cwd)
        .envs(inv.env)
        .stdin(Stdio::null())
        .stdout(File::create(inv.stdout)?)
        .stderr(File::create(inv.stderr)?)
        .spawn()?;
    let deadline = started + inv.timeout;
    let mut pause = Duration::from_millis(1);
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(ProcessResult {
                verdict: Verdict::from_status(status),
                exit_code: status.code(),
                signal: status.signal(),
                duration: started.elapsed(),
            });
        }
        let now = Instant::now();
        if now >= deadline {
            let _ = child.kill();
            let status = child.wait()?;
            return Ok(ProcessResult {
                verdict: Verdict::Timeout,
                exit_code: status.code(),
                signal: status.signal(),
                duration: started.elapsed(),
            });
        }
        thread::sleep(pause.min(deadline - now));
        pause = (pause * 2).min(Duration::from_millis(20));
    }
}
