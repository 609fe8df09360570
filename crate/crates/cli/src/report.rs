//! Machine-readable report files.
//!
//! A report echoes the command and its arguments, digests every input file,
//! records the tolerances in force (with where each came from), and carries
//! the numeric results and pass/fail verdicts. Re-running the same command
//! on the same inputs reproduces the report byte for byte except for the
//! `timestamp` field: maps are sorted and floats serialize in shortest
//! round-trip form.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Schema version of report files.
pub const REPORT_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// A tolerance value and its provenance (`default` or `flag`).
#[derive(Debug, Serialize)]
pub struct ToleranceEntry {
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub timestamp: String,
    pub tolerances: BTreeMap<String, ToleranceEntry>,
    pub results: serde_json::Value,
    pub verdicts: BTreeMap<String, bool>,
    pub pass: bool,
}

impl ReportFile {
    pub fn new(command: &str, args: &[String]) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            args: args.to_vec(),
            inputs: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            tolerances: BTreeMap::new(),
            results: serde_json::Value::Null,
            verdicts: BTreeMap::new(),
            pass: false,
        }
    }

    pub fn add_input(&mut self, path: &Path, contents: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(contents);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
    }

    pub fn add_tolerance(&mut self, name: &str, value: f64, from_flag: bool) {
        self.tolerances.insert(
            name.to_string(),
            ToleranceEntry {
                value,
                source: if from_flag { "flag" } else { "default" }.to_string(),
            },
        );
    }

    pub fn add_verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.insert(name.to_string(), ok);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
