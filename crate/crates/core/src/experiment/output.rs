/*
Copyright 2026 The spikecs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/


//! Output files: CSV tables with a seed/hash comment line and JSON manifests.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetSummary, ExperimentConfig};
use crate::error::{Error, Result};
use crate::prior::ModelRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Method label, or `-` for method-independent files.
    pub method: String,
    /// File name relative to the output directory.
    pub file: String,
    /// Data rows, excluding the comment and header lines.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub label: String,
    pub dictionary: String,
    pub dictionary_rows: usize,
    /// One weight per order group (all ones for unweighted methods).
    pub group_weights: Vec<f64>,
    pub model: Option<ModelRecord>,
    /// Solves that hit `max_iter` before meeting the tolerances.
    pub non_converged: usize,
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub dataset: Option<DatasetSummary>,
    pub trial_seeds: Vec<u64>,
    pub methods: Vec<MethodInfo>,
    pub outputs: Vec<OutputEntry>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Manifest {
            tool: "spikecs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            master_seed: config.master_seed,
            config_hash: config.hash(),
            config: config.clone(),
            dataset: None,
            trial_seeds: Vec::new(),
            methods: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is always serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<String> {
        let name = format!("{}_manifest.json", self.command);
        write_file(&dir.join(&name), &self.to_json())?;
        Ok(name)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// A CSV table whose first line is `# spikecs <command> master_seed=.. config_hash=..`.
pub(crate) struct Table {
    text: String,
    rows: usize,
}

impl Table {
    pub fn new(command: &str, config: &ExperimentConfig, extra: &str, header: &[&str]) -> Self {
        let mut text = format!(
            "# spikecs {command} master_seed={} config_hash={}",
            config.master_seed,
            config.hash()
        );
        if !extra.is_empty() {
            text.push(' ');
            text.push_str(extra);
        }
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        Table { text, rows: 0 }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn write(self, dir: &Path, name: &str, method: &str) -> Result<OutputEntry> {
        write_file(&dir.join(name), &self.text)?;
        Ok(OutputEntry {
            method: method.into(),
            file: name.into(),
            rows: self.rows,
        })
    }
}

/// Fixed six-decimal formatting so outputs compare byte for byte.
pub(crate) fn num(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v:.6}").unwrap();
    s
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
