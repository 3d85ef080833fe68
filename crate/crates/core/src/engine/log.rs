//! Application log: one JSON object per line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::MutantId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Mutation,
    Coverage,
}

/// One probe invocation. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicationRecord {
    pub sequence_no: u64,
    pub kind: RecordKind,
    pub test_id: String,
    pub fault_model: String,
    pub mutant_id: MutantId,
    pub row_index: Option<usize>,
    pub procedure_index: Option<u8>,
    pub applied: bool,
    pub clamped: bool,
    pub original_bytes: String,
    pub mutated_bytes: String,
}

impl ApplicationRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("records always serialize");
        line.push('\n');
        line
    }
}

#[derive(Debug)]
pub enum LogSink {
    Discard,
    Memory(Vec<ApplicationRecord>),
    File { path: PathBuf, file: File },
}

impl LogSink {
    pub fn memory() -> Self {
        LogSink::Memory(Vec::new())
    }

    /// Opens `path` for appending, creating it if needed.
    pub fn append_to(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(LogSink::File { path, file })
    }

    pub fn write(&mut self, record: ApplicationRecord) -> io::Result<()> {
        match self {
            LogSink::Discard => Ok(()),
            LogSink::Memory(records) => {
                records.push(record);
                Ok(())
            }
            // A single write per record keeps lines whole under O_APPEND.
            LogSink::File { file, .. } => file.write_all(record.to_line().as_bytes()),
        }
    }

    pub fn records(&self) -> &[ApplicationRecord] {
        match self {
            LogSink::Memory(records) => records,
            _ => &[],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogReadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn parse_log(text: &str) -> Result<Vec<ApplicationRecord>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

/// Reads a log file; a missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<ApplicationRecord>, LogReadError> {
    let shown = || path.display().to_string();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(LogReadError::Io { path: shown(), source }),
    };
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| LogReadError::Io { path: shown(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| LogReadError::Json {
            path: shown(),
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ApplicationRecord {
        ApplicationRecord {
            sequence_no: 0,
            kind: RecordKind::Mutation,
            test_id: "t1".into(),
            fault_model: "IfHK".into(),
            mutant_id: MutantId(3),
            row_index: Some(2),
            procedure_index: Some(0),
            applied: true,
            clamped: false,
            original_bytes: "190d".into(),
            mutated_bytes: "1a0d".into(),
        }
    }

    #[test]
    fn line_format_is_fixed() {
        assert_eq!(
            record().to_line(),
            "{\"sequence_no\":0,\"kind\":\"mutation\",\"test_id\":\"t1\",\"fault_model\":\"IfHK\",\
             \"mutant_id\":3,\"row_index\":2,\"procedure_index\":0,\"applied\":true,\"clamped\":false,\
             \"original_bytes\":\"190d\",\"mutated_bytes\":\"1a0d\"}\n"
        );
        let coverage = ApplicationRecord {
            kind: RecordKind::Coverage,
            mutant_id: MutantId(0),
            row_index: None,
            procedure_index: None,
            applied: false,
            original_bytes: String::new(),
            mutated_bytes: String::new(),
            ..record()
        };
        assert!(coverage.to_line().contains("\"row_index\":null,\"procedure_index\":null"));
    }

    #[test]
    fn file_sink_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("app.log");
        let mut sink = LogSink::append_to(&path).unwrap();
        sink.write(record()).unwrap();
        sink.write(ApplicationRecord { sequence_no: 1, ..record() }).unwrap();
        drop(sink);
        let back = read_log(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], record());
        assert!(read_log(&dir.path().join("missing.log")).unwrap().is_empty());
    }
}
