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


//! Training stage: per-order deviations and the fitted variance law.

use super::output::{num, write_file, Table};
use super::{prepare, ExperimentConfig, Manifest, OutputEntry};
use crate::error::{Error, Result};
use crate::prior::{train_model, ModelRecord, OrderVarianceModel};

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub model: OrderVarianceModel,
    pub record: ModelRecord,
    pub manifest: Manifest,
}

/// Fits the variance law on the training split over `training_orders` and
/// writes `model.toml`, `regression.csv` (`f, log2_sigma_sq, fitted`) and
/// `train_manifest.json`.
pub fn run_training(config: &ExperimentConfig) -> Result<TrainingRun> {
    config.validate()?;
    if config.model.is_some() {
        return Err(Error::Config("`model` is set; nothing to train".into()));
    }
    let prep = prepare(config, true)?;
    let orders = config.training_orders();
    let model = train_model(&prep.training, orders)?;

    let mut record = ModelRecord::from(&model);
    record.master_seed = Some(config.master_seed);
    record.config_hash = Some(config.hash());
    let text = format!(
        "# spikecs train master_seed={} config_hash={}\n{}",
        config.master_seed,
        config.hash(),
        record.to_text()
    );
    write_file(&config.output_dir.join("model.toml"), &text)?;

    let mut table = Table::new("train", config, "", &["f", "log2_sigma_sq", "fitted"]);
    for &(f, sigma) in &model.per_order_sigma {
        table.row(&[num(f), num((sigma * sigma).log2()), num(model.log2_variance(f))]);
    }
    let mut manifest = Manifest::new("train", config);
    manifest.dataset = Some(prep.summary(config));
    manifest.outputs.push(OutputEntry {
        method: "-".into(),
        file: "model.toml".into(),
        rows: 1,
    });
    manifest.outputs.push(table.write(&config.output_dir, "regression.csv", "-")?);
    manifest.write(&config.output_dir)?;
    Ok(TrainingRun {
        model,
        record,
        manifest,
    })
}
