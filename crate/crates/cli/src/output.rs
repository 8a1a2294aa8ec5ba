use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use depshap::scenarios::Check;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
}

/// What every command writes as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub scenario: Option<String>,
    pub records: Vec<ReportRecord>,
    #[serde(default)]
    pub checks: Vec<Check>,
    pub passed: Option<bool>,
    pub metadata: Map<String, Value>,
    /// Seconds since the Unix epoch; the only field that differs between
    /// identical runs.
    pub generated_at: u64,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            scenario: None,
            records: Vec::new(),
            checks: Vec::new(),
            passed: None,
            metadata: Map::new(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("metadata is serializable");
        self.metadata.insert(key.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// `name,value,lower,upper` (plus `series,t` when present).
    pub fn records_csv(&self) -> Result<Vec<u8>, CliError> {
        let long = self
            .records
            .iter()
            .any(|r| r.series.is_some() || r.t.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let io = |e: csv::Error| CliError::Io(e.to_string());
        if long {
            w.write_record(["series", "feature", "t", "value", "lower", "upper"])
                .map_err(io)?;
        } else {
            w.write_record(["name", "value", "lower", "upper"])
                .map_err(io)?;
        }
        for r in &self.records {
            let value = r.value.to_string();
            if long {
                let t = r.t.map(|t| t.to_string()).unwrap_or_default();
                let series = r.series.clone().unwrap_or_default();
                w.write_record([
                    series.as_str(),
                    &r.name,
                    &t,
                    &value,
                    &opt(r.lower),
                    &opt(r.upper),
                ])
                .map_err(io)?;
            } else {
                w.write_record([r.name.as_str(), &value, &opt(r.lower), &opt(r.upper)])
                    .map_err(io)?;
            }
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Output files go through a temporary file in the same directory and are
/// renamed into place, so a failed run leaves no partial file behind.
pub struct OutputDir {
    dir: PathBuf,
    input: Option<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path, input: Option<&Path>) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let input = input.map(|p| p.canonicalize().unwrap_or_else(|_| p.to_path_buf()));
        Ok(Self {
            dir: dir.to_path_buf(),
            input,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Refuses to overwrite the input file.
    pub fn check(&self, name: &str) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        if let (Some(input), Ok(resolved)) = (&self.input, target.canonicalize()) {
            if &resolved == input {
                return Err(CliError::Config(format!(
                    "output {} would overwrite the input",
                    target.display()
                )));
            }
        }
        Ok(target)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.check(name)?;
        let io =
            |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", target.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        Ok(target)
    }
}
