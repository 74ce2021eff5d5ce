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


//! Co-sparsity of dataset frames under difference operators.

use nalgebra::DVector;
use rayon::prelude::*;

use super::output::{num, Table};
use super::{load_or_synthesize, with_pool, ExperimentConfig, Manifest};
use crate::error::Result;
use crate::eval::co_sparsity;
use crate::fracdiff::{build_mfod, AnalysisDictionary};

#[derive(Debug, Clone)]
pub struct CosparsityRun {
    /// `(order, mean co-sparsity)` for each of `curve_orders`.
    pub curve: Vec<(f64, f64)>,
    /// `counts[k]`: frames with co-sparsity `k` at `histogram_order`.
    pub histogram: Vec<usize>,
    pub manifest: Manifest,
}

fn cosparsities(dict: &AnalysisDictionary, frames: &[DVector<f64>], tol: f64) -> Vec<usize> {
    frames
        .par_iter()
        .map(|x| co_sparsity((&dict.matrix * x).as_slice(), tol))
        .collect()
}

/// Writes `cosparsity_curve.csv` (`order, integer, mean_cosparsity,
/// mean_fraction`), `cosparsity_histogram.csv` (`cosparsity, count`) and
/// `co-sparsity_manifest.json` for every frame of the dataset.
pub fn run_cosparsity(config: &ExperimentConfig) -> Result<CosparsityRun> {
    config.validate()?;
    let ds = load_or_synthesize(config)?;
    let n = ds.frame_length();
    let frames: Vec<DVector<f64>> = ds.frames.iter().map(|f| DVector::from_column_slice(&f.samples)).collect();
    let tol = config.cosparsity_tol;

    let (curve, histogram) = with_pool(config, || -> Result<_> {
        let mut curve = Vec::with_capacity(config.curve_orders.len());
        for &f in &config.curve_orders {
            let dict = build_mfod(&[f], n)?;
            let k = cosparsities(&dict, &frames, tol);
            curve.push((f, k.iter().sum::<usize>() as f64 / k.len() as f64));
        }
        let dict = build_mfod(&[config.histogram_order], n)?;
        let mut histogram = vec![0usize; n + 1];
        for k in cosparsities(&dict, &frames, tol) {
            histogram[k] += 1;
        }
        Ok((curve, histogram))
    })??;

    let mut manifest = Manifest::new("co-sparsity", config);
    manifest.dataset = Some(super::DatasetSummary {
        name: ds.name.clone(),
        source: config
            .dataset
            .as_ref()
            .map_or_else(|| "synthetic".to_string(), |p| p.display().to_string()),
        frames: ds.len(),
        frame_length: n,
        units: ds.units(),
        training_frames: 0,
        evaluation_frames: ds.len(),
    });
    let mut table = Table::new(
        "co-sparsity",
        config,
        &format!("tol={tol}"),
        &["order", "integer", "mean_cosparsity", "mean_fraction"],
    );
    for &(f, mean) in &curve {
        let integer = if f.fract() == 0.0 { "1" } else { "0" };
        table.row(&[num(f), integer.into(), num(mean), num(mean / n as f64)]);
    }
    manifest.outputs.push(table.write(&config.output_dir, "cosparsity_curve.csv", "-")?);
    let mut table = Table::new(
        "co-sparsity",
        config,
        &format!("tol={tol} order={}", config.histogram_order),
        &["cosparsity", "count"],
    );
    for (k, &c) in histogram.iter().enumerate() {
        table.row(&[k.to_string(), c.to_string()]);
    }
    manifest.outputs.push(table.write(&config.output_dir, "cosparsity_histogram.csv", "-")?);
    manifest.write(&config.output_dir)?;
    Ok(CosparsityRun {
        curve,
        histogram,
        manifest,
    })
}
