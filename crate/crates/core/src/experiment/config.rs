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


//! Flat experiment configuration shared by every run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::signal::{SynthParams, DEFAULT_FRAME_LENGTH, DEFAULT_PRE_PEAK};
use crate::solver::SolverConfig;

/// Every key of the config file. The same names are accepted as overrides.
pub const CONFIG_KEYS: &[&str] = &[
    "dataset",
    "dataset_format",
    "units",
    "frames_per_unit",
    "n",
    "noise_sigma",
    "jitter",
    "amplitude_spread",
    "pre_peak",
    "orders",
    "methods",
    "measurements",
    "trials",
    "max_spikes",
    "master_seed",
    "measurement_noise",
    "lambda",
    "lambda_scale",
    "noise_sigma_hint",
    "penalty",
    "adaptive_penalty",
    "relaxation",
    "abs_tol",
    "rel_tol",
    "max_iter",
    "training_frames",
    "training_orders",
    "model",
    "clip_ratio",
    "normalize_weights",
    "rtf_rows",
    "good_threshold",
    "classify_measurements",
    "features",
    "feature_kind",
    "kmeans_restarts",
    "cosparsity_tol",
    "histogram_order",
    "curve_orders",
    "output_dir",
    "threads",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Spike file to load. When unset, a synthetic dataset is generated.
    pub dataset: Option<PathBuf>,
    /// `csv` or `raw-binary`; inferred from the extension when unset.
    pub dataset_format: Option<String>,

    pub units: usize,
    pub frames_per_unit: usize,
    pub n: usize,
    pub noise_sigma: f64,
    pub jitter: f64,
    pub amplitude_spread: f64,
    pub pre_peak: usize,

    /// Order set of the default dictionary.
    pub orders: Vec<f64>,
    /// Reconstruction methods, see [`super::Method`].
    pub methods: Vec<String>,
    pub measurements: Vec<usize>,
    pub trials: usize,
    /// Cap on the number of evaluation spikes.
    pub max_spikes: Option<usize>,
    pub master_seed: u64,
    /// Standard deviation of additive measurement noise.
    pub measurement_noise: f64,

    pub lambda: Option<f64>,
    pub lambda_scale: f64,
    pub noise_sigma_hint: Option<f64>,
    pub penalty: f64,
    pub adaptive_penalty: bool,
    pub relaxation: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,

    pub training_frames: usize,
    /// Orders used to fit the variance law; defaults to `orders`.
    pub training_orders: Option<Vec<f64>>,
    /// Trained model file to use instead of training.
    pub model: Option<PathBuf>,
    pub clip_ratio: f64,
    /// Scale weights to unit mean so λ means the same for weighted and unweighted runs.
    pub normalize_weights: bool,
    /// Rows of the random tight frame baseline; defaults to `orders.len() · n`.
    pub rtf_rows: Option<usize>,
    pub good_threshold: f64,

    pub classify_measurements: usize,
    pub features: usize,
    /// `pca` or `haar`.
    pub feature_kind: String,
    pub kmeans_restarts: usize,

    pub cosparsity_tol: f64,
    pub histogram_order: f64,
    pub curve_orders: Vec<f64>,

    pub output_dir: PathBuf,
    /// Worker threads; all cores when unset. Results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            dataset_format: None,
            units: 3,
            frames_per_unit: 200,
            n: DEFAULT_FRAME_LENGTH,
            noise_sigma: 0.0,
            jitter: 2.0,
            amplitude_spread: 0.1,
            pre_peak: DEFAULT_PRE_PEAK,
            orders: vec![3.5, 4.0, 4.5],
            methods: vec!["walm".into(), "al1".into()],
            measurements: (16..=80).step_by(8).collect(),
            trials: 20,
            max_spikes: None,
            master_seed: 0,
            measurement_noise: 0.0,
            lambda: None,
            lambda_scale: 1e-4,
            noise_sigma_hint: None,
            penalty: 1.0,
            adaptive_penalty: true,
            relaxation: 1.6,
            abs_tol: 1e-6,
            rel_tol: 1e-4,
            max_iter: 5000,
            training_frames: crate::prior::DEFAULT_TRAINING_FRAMES,
            training_orders: None,
            model: None,
            clip_ratio: crate::prior::DEFAULT_CLIP_RATIO,
            normalize_weights: true,
            rtf_rows: None,
            good_threshold: crate::eval::GOOD_PRD_THRESHOLD,
            classify_measurements: 16,
            features: 10,
            feature_kind: "pca".into(),
            kmeans_restarts: 10,
            cosparsity_tol: crate::eval::DEFAULT_COSPARSITY_TOL,
            histogram_order: 2.0,
            curve_orders: (0..=16).map(|i| i as f64 * 0.5).collect(),
            output_dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

/// Parses a command-line override value: TOML literal first, then a bare
/// comma-separated list, then a plain string.
fn parse_override(raw: &str) -> toml::Value {
    let attempt = |text: &str| -> Option<toml::Value> {
        let table: toml::Table = toml::from_str(&format!("v = {text}")).ok()?;
        table.get("v").cloned()
    };
    if let Some(v) = attempt(raw) {
        return v;
    }
    if raw.contains(',') {
        if let Some(v) = attempt(&format!("[{raw}]")) {
            return v;
        }
    }
    toml::Value::String(raw.to_string())
}

/// Methods are separated by `;` or whitespace, or by `,` when no method
/// carries an order list (`walm,al1` but `walm;al1:3,4,5`).
fn parse_methods_override(raw: &str) -> toml::Value {
    if raw.trim_start().starts_with('[') {
        return parse_override(raw);
    }
    let items: Vec<&str> = if raw.contains(';') || raw.trim().contains(char::is_whitespace) {
        raw.split(|c: char| c == ';' || c.is_whitespace()).collect()
    } else if raw.contains(':') {
        vec![raw]
    } else {
        raw.split(',').collect()
    };
    toml::Value::Array(
        items
            .into_iter()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| toml::Value::String(s.to_string()))
            .collect(),
    )
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `file` (if any), applies `key=value` overrides in order, and validates.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        for (key, raw) in overrides {
            let key = key.replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
            let mut value = if key == "methods" {
                parse_methods_override(raw)
            } else {
                parse_override(raw)
            };
            // a single number given for a list key
            if LIST_KEYS.contains(&key.as_str()) && !value.is_array() {
                value = toml::Value::Array(vec![value]);
            }
            if STRING_KEYS.contains(&key.as_str()) && !value.is_str() {
                value = toml::Value::String(raw.clone());
            }
            table.insert(key, value);
        }
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.dataset.is_none() {
            if self.units == 0 || self.frames_per_unit == 0 {
                return bad("units and frames_per_unit must be >= 1".into());
            }
            if self.pre_peak >= self.n {
                return bad(format!("pre_peak {} must be < n {}", self.pre_peak, self.n));
            }
        }
        if let Some(fmt) = &self.dataset_format {
            fmt.parse::<crate::signal::DatasetFormat>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.noise_sigma >= 0.0 && self.jitter >= 0.0 && self.amplitude_spread >= 0.0) {
            return bad("noise_sigma, jitter and amplitude_spread must be >= 0".into());
        }
        if self.orders.is_empty() {
            return bad("orders must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        for m in &self.methods {
            super::Method::parse(m, &self.orders)?;
        }
        if self.measurements.is_empty() {
            return bad("measurements must not be empty".into());
        }
        if let Some(&m) = self.measurements.iter().find(|&&m| m == 0 || m > self.n) {
            return bad(format!("measurement count {m} must be in 1..={}", self.n));
        }
        if self.classify_measurements == 0 || self.classify_measurements > self.n {
            return bad(format!(
                "classify_measurements {} must be in 1..={}",
                self.classify_measurements, self.n
            ));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.measurement_noise >= 0.0 && self.measurement_noise.is_finite()) {
            return bad("measurement_noise must be >= 0".into());
        }
        self.solver().validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.clip_ratio >= 1.0) {
            return bad(format!("clip_ratio must be >= 1, got {}", self.clip_ratio));
        }
        if let Some(rows) = self.rtf_rows {
            if rows < self.n {
                return bad(format!("rtf_rows {rows} must be >= n {}", self.n));
            }
        }
        if !(self.good_threshold > 0.0) {
            return bad("good_threshold must be positive".into());
        }
        if self.features == 0 || self.features > self.n {
            return bad(format!("features must be in 1..={}", self.n));
        }
        if self.feature_kind != "pca" && self.feature_kind != "haar" {
            return bad(format!("feature_kind must be `pca` or `haar`, got `{}`", self.feature_kind));
        }
        if self.kmeans_restarts == 0 {
            return bad("kmeans_restarts must be >= 1".into());
        }
        if !(self.cosparsity_tol >= 0.0) {
            return bad("cosparsity_tol must be >= 0".into());
        }
        for &f in self.curve_orders.iter().chain([self.histogram_order].iter()) {
            if !(f >= 0.0 && f.is_finite()) {
                return bad(format!("invalid order {f}"));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            lambda_scale: self.lambda_scale,
            noise_sigma_hint: self.noise_sigma_hint,
            penalty: self.penalty,
            adaptive_penalty: self.adaptive_penalty,
            relaxation: self.relaxation,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_iter: self.max_iter,
        }
    }

    pub fn synth_params(&self) -> SynthParams {
        SynthParams {
            units: self.units,
            frames_per_unit: self.frames_per_unit,
            n: self.n,
            noise_sigma: self.noise_sigma,
            seed: self.master_seed,
            jitter: self.jitter,
            amplitude_spread: self.amplitude_spread,
            pre_peak: self.pre_peak,
        }
    }

    pub fn training_orders(&self) -> &[f64] {
        self.training_orders.as_deref().unwrap_or(&self.orders)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// SHA-256 of the canonical TOML form, ignoring keys that cannot change
    /// results (`output_dir`, `threads`).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.threads = None;
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const LIST_KEYS: &[&str] = &["orders", "methods", "measurements", "training_orders", "curve_orders"];
const STRING_KEYS: &[&str] = &["dataset", "dataset_format", "model", "feature_kind", "output_dir"];
