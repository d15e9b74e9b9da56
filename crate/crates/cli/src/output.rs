//! CSV and manifest emission. Numbers are written with 17 significant digits
//! and LF line endings so that reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Config;
use crate::error::CliError;

pub fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// A column-ordered numeric table.
pub struct Table {
    header: Vec<String>,
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        let mut text = header.join(",");
        text.push('\n');
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            text,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.header.len(), "row width");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{}", number(*v)).unwrap();
        }
        self.text.push('\n');
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// 17 significant digits; zero is written without a sign.
pub fn number(v: f64) -> String {
    if v == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    pub config: Config,
    /// Further runs of a figure, each with its own physical parameters.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<Config>,
    pub outputs: Vec<OutputFile>,
    pub diagnostics: BTreeMap<String, Value>,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Collects the files of one run before the manifest is written.
pub struct Sink {
    dir: PathBuf,
    pub outputs: Vec<OutputFile>,
    pub diagnostics: BTreeMap<String, Value>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Sink, CliError> {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            diagnostics: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, table.text()).map_err(io_error(&path))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            columns: table.header.clone(),
            rows: table.text.lines().count() - 1,
        });
        Ok(())
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.diagnostics.insert(key.into(), v);
    }

    pub fn finish(self, mut manifest: Manifest) -> Result<PathBuf, CliError> {
        manifest.outputs = self.outputs;
        manifest.diagnostics = self.diagnostics;
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(io_error(&path))?;
        Ok(path)
    }
}
