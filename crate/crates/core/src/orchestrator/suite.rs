use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::OrchestratorError;

fn default_timeout() -> f64 {
    60.0
}

/// One executable test; exit status 0 means pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub cmd: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cwd: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub env: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Suite {
    pub tests: Vec<TestCase>,
}

fn safe_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.'))
}

impl Suite {
    pub fn parse(json: &str) -> Result<Self, OrchestratorError> {
        let suite: Suite =
            serde_json::from_str(json).map_err(|e| OrchestratorError::Suite(e.to_string()))?;
        suite.check()?;
        Ok(suite)
    }

    /// Loads a manifest; relative `cwd` entries and relative program paths
    /// containing a `/` are resolved against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrchestratorError::Suite(format!("{}: {e}", path.display())))?;
        let mut suite = Self::parse(&text)?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let base = std::fs::canonicalize(&base).unwrap_or(base);
        for test in &mut suite.tests {
            if let Some(cwd) = &test.cwd {
                if cwd.is_relative() {
                    test.cwd = Some(base.join(cwd));
                }
            }
            let program = Path::new(&test.cmd[0]);
            if program.is_relative() && test.cmd[0].contains('/') {
                test.cmd[0] = base.join(program).display().to_string();
            }
        }
        Ok(suite)
    }

    fn check(&self) -> Result<(), OrchestratorError> {
        if self.tests.is_empty() {
            return Err(OrchestratorError::Suite("suite has no tests".into()));
        }
        let mut seen = HashSet::new();
        for test in &self.tests {
            if !safe_id(&test.id) {
                return Err(OrchestratorError::Suite(format!(
                    "test id {:?} must use only letters, digits, '-', '_' and '.'",
                    test.id
                )));
            }
            if !seen.insert(test.id.as_str()) {
                return Err(OrchestratorError::Suite(format!("duplicate test id {:?}", test.id)));
            }
            if test.cmd.is_empty() {
                return Err(OrchestratorError::Suite(format!("test {:?} has an empty cmd", test.id)));
            }
            if !(test.timeout_s.is_finite() && test.timeout_s > 0.0) {
                return Err(OrchestratorError::Suite(format!(
                    "test {:?} needs a positive timeout_s",
                    test.id
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }
}
