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


//! Seeded experiment runs that write figure-ready CSV files.
//!
//! Every run derives all randomness from `master_seed`:
//! - train/evaluation split: a shuffle seeded with `master_seed ^ SPLIT_SALT`;
//! - trial `t`: [`trial_seed`]`(master_seed, t)`, also the seed of that trial's
//!   sensing matrix (so for one trial, smaller matrices are the leading rows
//!   of larger ones);
//! - measurement noise of spike `i` in trial `t`: [`noise_seed`]`(trial seed, i)`;
//! - random tight frame baseline: `master_seed ^ RTF_SALT`;
//! - k-means: `master_seed`.
//!
//! Work is spread over threads per spike and collected by index, so outputs do
//! not depend on the thread count.
//!
//! [`trial_seed`]: crate::sensing::trial_seed
//! [`noise_seed`]: crate::sensing::noise_seed

mod classify;
mod config;
mod cosparsity;
mod output;
mod sweep;
mod train;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use classify::{run_classification, ClassificationRun, ClassificationSummary};
pub use config::{ExperimentConfig, CONFIG_KEYS};
pub use cosparsity::{run_cosparsity, CosparsityRun};
pub use output::{Manifest, OutputEntry};
pub use sweep::{run_sweep, SweepRow, SweepRun};
pub use train::{run_training, TrainingRun};

use crate::error::{Error, Result};
use crate::fracdiff::{build_mfod, build_random_tight_frame, AnalysisDictionary};
use crate::prior::{build_weights, train_model, ModelRecord, OrderVarianceModel, WeightVector};
use crate::signal::{load_dataset, synthesize_dataset, Dataset, DatasetFormat, SpikeFrame};

pub const SPLIT_SALT: u64 = 0x7370_6c69_7400_0001;
pub const RTF_SALT: u64 = 0x7274_6600_0000_0001;

/// Dictionary choice of a method.
#[derive(Debug, Clone, PartialEq)]
pub enum DictSpec {
    /// The config's `orders`.
    Default,
    Orders(Vec<f64>),
    RandomTightFrame,
}

/// A reconstruction method: `walm`, `al1`, optionally with `:<orders>` or
/// `:rtf`, e.g. `al1:3,4,5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub weighted: bool,
    pub dict: DictSpec,
}

impl Method {
    pub fn parse(text: &str, default_orders: &[f64]) -> Result<Self> {
        let (kind, dict) = match text.split_once(':') {
            Some((k, d)) => (k.trim(), Some(d.trim())),
            None => (text.trim(), None),
        };
        let weighted = match kind {
            "walm" => true,
            "al1" => false,
            other => return Err(Error::Config(format!("unknown method `{other}` in `{text}`"))),
        };
        let dict = match dict {
            None => DictSpec::Default,
            Some("rtf") if weighted => {
                return Err(Error::Config(format!(
                    "`{text}`: weights need a difference dictionary"
                )))
            }
            Some("rtf") => DictSpec::RandomTightFrame,
            Some(list) => {
                let orders = list
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|e| Error::Config(format!("`{text}`: {e}")))?;
                if orders.as_slice() == default_orders {
                    DictSpec::Default
                } else {
                    DictSpec::Orders(orders)
                }
            }
        };
        Ok(Method { weighted, dict })
    }

    /// File-name friendly label, e.g. `walm`, `al1-3-4-5`, `al1-rtf`.
    pub fn label(&self) -> String {
        let kind = if self.weighted { "walm" } else { "al1" };
        match &self.dict {
            DictSpec::Default => kind.to_string(),
            DictSpec::Orders(o) => format!(
                "{kind}-{}",
                o.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("-")
            ),
            DictSpec::RandomTightFrame => format!("{kind}-rtf"),
        }
    }

    pub fn orders<'a>(&'a self, default_orders: &'a [f64]) -> Option<&'a [f64]> {
        match &self.dict {
            DictSpec::Default => Some(default_orders),
            DictSpec::Orders(o) => Some(o),
            DictSpec::RandomTightFrame => None,
        }
    }
}

/// A method ready to run: its dictionary and weights.
pub(crate) struct PreparedMethod {
    pub label: String,
    pub dict: AnalysisDictionary,
    pub weights: WeightVector,
    pub model: Option<OrderVarianceModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    /// Path of the loaded file, or `synthetic`.
    pub source: String,
    pub frames: usize,
    pub frame_length: usize,
    pub units: Vec<u32>,
    pub training_frames: usize,
    pub evaluation_frames: usize,
}

/// Dataset split into training and evaluation frames.
pub(crate) struct Prepared {
    pub dataset: Dataset,
    pub training: Vec<SpikeFrame>,
    pub evaluation: Vec<SpikeFrame>,
}

impl Prepared {
    pub fn summary(&self, config: &ExperimentConfig) -> DatasetSummary {
        DatasetSummary {
            name: self.dataset.name.clone(),
            source: config
                .dataset
                .as_ref()
                .map_or_else(|| "synthetic".to_string(), |p| p.display().to_string()),
            frames: self.dataset.len(),
            frame_length: self.dataset.frame_length(),
            units: self.dataset.units(),
            training_frames: self.training.len(),
            evaluation_frames: self.evaluation.len(),
        }
    }
}

/// Loads the configured file or synthesizes a dataset.
pub fn load_or_synthesize(config: &ExperimentConfig) -> Result<Dataset> {
    let ds = match &config.dataset {
        Some(path) => {
            let format = match &config.dataset_format {
                Some(f) => f.parse::<DatasetFormat>()?,
                None => DatasetFormat::from_path(path),
            };
            load_dataset(path, format)?
        }
        None => synthesize_dataset(&config.synth_params())?,
    };
    if ds.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if config.dataset.is_some() && ds.frame_length() != config.n {
        return Err(Error::Config(format!(
            "dataset frames have length {} but n = {}",
            ds.frame_length(),
            config.n
        )));
    }
    Ok(ds)
}

/// Splits off `training_frames` frames by a seeded shuffle. With a model
/// file, no frames are held out. Both parts keep dataset order.
pub(crate) fn prepare(config: &ExperimentConfig, need_training: bool) -> Result<Prepared> {
    let dataset = load_or_synthesize(config)?;
    let hold_out = if need_training && config.model.is_none() {
        config.training_frames
    } else {
        0
    };
    if hold_out >= dataset.len() {
        return Err(Error::Config(format!(
            "training_frames = {hold_out} leaves no evaluation frames out of {}",
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.master_seed ^ SPLIT_SALT));
    let mut training_idx = order[..hold_out].to_vec();
    let mut eval_idx = order[hold_out..].to_vec();
    if let Some(cap) = config.max_spikes {
        eval_idx.truncate(cap);
    }
    training_idx.sort_unstable();
    eval_idx.sort_unstable();
    let training = training_idx.iter().map(|&i| dataset.frames[i].clone()).collect();
    let evaluation: Vec<SpikeFrame> = eval_idx.iter().map(|&i| dataset.frames[i].clone()).collect();
    if evaluation.is_empty() {
        return Err(Error::Config("no evaluation frames".into()));
    }
    Ok(Prepared {
        dataset,
        training,
        evaluation,
    })
}

/// Model for `orders`: loaded from the configured file or trained.
pub(crate) fn obtain_model(
    config: &ExperimentConfig,
    training: &[SpikeFrame],
    orders: &[f64],
) -> Result<OrderVarianceModel> {
    match &config.model {
        Some(path) => ModelRecord::load(path)?.into_model(),
        None => train_model(training, orders).map_err(|e| e.context("training")),
    }
}

pub(crate) fn prepare_methods(
    config: &ExperimentConfig,
    training: &[SpikeFrame],
) -> Result<Vec<PreparedMethod>> {
    let n = config.n;
    let mut out = Vec::new();
    for text in &config.methods {
        let method = Method::parse(text, &config.orders)?;
        let label = method.label();
        if out.iter().any(|p: &PreparedMethod| p.label == label) {
            return Err(Error::Config(format!("method `{label}` listed twice")));
        }
        let dict = match method.orders(&config.orders) {
            Some(orders) => build_mfod(orders, n).map_err(|e| Error::Config(format!("{text}: {e}")))?,
            None => build_random_tight_frame(
                config.rtf_rows.unwrap_or(config.orders.len() * n),
                n,
                config.master_seed ^ RTF_SALT,
            )?,
        };
        let (weights, model) = if method.weighted {
            let orders = dict.orders().to_vec();
            let model = obtain_model(config, training, &orders)?;
            let w = build_weights(&model, &orders, n, config.clip_ratio)?;
            let w = if config.normalize_weights { w.normalized() } else { w };
            (w, Some(model))
        } else {
            (WeightVector::uniform(dict.rows()), None)
        };
        out.push(PreparedMethod {
            label,
            dict,
            weights,
            model,
        });
    }
    Ok(out)
}

/// Runs `f` on a pool with the configured thread count.
pub(crate) fn with_pool<T: Send>(config: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    match config.threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
