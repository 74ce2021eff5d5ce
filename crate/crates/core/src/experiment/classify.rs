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


//! Spike classification on reconstructed frames.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{num, Table};
use super::sweep::method_info;
use super::{prepare, prepare_methods, with_pool, ExperimentConfig, Manifest, Method};
use crate::error::{Error, Result};
use crate::eval::{
    classification_accuracy, haar_features, kmeans_classify, pca_features, prd, ClassificationReport,
};
use crate::sensing::{bernoulli_matrix, measure, noise_seed, trial_seed};
use crate::solver::Reconstructor;

/// Label of the uncompressed reference run.
pub const ORIGINAL: &str = "original";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub method: String,
    /// Mean PRD of the classified frames (0 for the original frames).
    pub mean_prd: f64,
    pub report: ClassificationReport,
}

#[derive(Debug, Clone)]
pub struct ClassificationRun {
    /// The original frames first, then each configured method.
    pub results: Vec<ClassificationSummary>,
    pub manifest: Manifest,
}

impl ClassificationRun {
    pub fn accuracy(&self, method: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.report.accuracy)
    }
}

fn features(config: &ExperimentConfig, frames: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if config.feature_kind == "haar" {
        haar_features(frames, config.features)
    } else {
        Ok(pca_features(frames, config.features)?.features)
    }
}

/// Reconstructs every evaluation frame at `classify_measurements` (trial 0
/// sensing matrix), clusters features with k = number of true units, and
/// writes `classify_summary.csv`, `classify_scatter_<method>.csv` and
/// `classify_manifest.json`.
pub fn run_classification(config: &ExperimentConfig) -> Result<ClassificationRun> {
    config.validate()?;
    let weighted = config
        .methods
        .iter()
        .any(|m| Method::parse(m, &config.orders).is_ok_and(|m| m.weighted));
    let prep = prepare(config, weighted)?;
    if !prep.dataset.is_labeled() {
        return Err(Error::Config("classification needs a labeled dataset".into()));
    }
    let methods = prepare_methods(config, &prep.training)?;
    let m = config.classify_measurements;
    let seed = trial_seed(config.master_seed, 0);
    let phi = bernoulli_matrix(m, config.n, seed)?;
    let solver = config.solver();
    let truth: Vec<u32> = prep.evaluation.iter().map(|f| f.label.expect("labeled")).collect();
    let k = prep.dataset.units().len();
    let originals: Vec<Vec<f64>> = prep.evaluation.iter().map(|f| f.samples.clone()).collect();

    let mut sets: Vec<(String, Vec<Vec<f64>>, usize, usize)> = vec![(ORIGINAL.to_string(), originals.clone(), 0, 0)];
    for pm in &methods {
        let rec = Reconstructor::new(&phi, &pm.dict)?;
        let solved = with_pool(config, || {
            originals
                .par_iter()
                .enumerate()
                .map(|(i, x)| {
                    let x = DVector::from_column_slice(x);
                    let y = measure(&phi, &x, config.measurement_noise, noise_seed(seed, i))?.values;
                    rec.solve(&y, &pm.weights, &solver)
                        .map_err(|e| e.context(format!("method {} spike={i}", pm.label)))
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let non_converged = solved.iter().filter(|r| !r.converged).count();
        let frames = solved.into_iter().map(|r| r.x_hat.as_slice().to_vec()).collect();
        sets.push((pm.label.clone(), frames, non_converged, originals.len()));
    }

    let mut manifest = Manifest::new("classify", config);
    manifest.dataset = Some(prep.summary(config));
    manifest.trial_seeds = vec![seed];
    let mut summary = Table::new(
        "classify",
        config,
        &format!("M={m}"),
        &["method", "accuracy", "mean_prd", "features_used"],
    );
    let mut results = Vec::new();
    for (label, frames, _, _) in &sets {
        let feats = features(config, frames).map_err(|e| e.context(format!("features for {label}")))?;
        let clusters = kmeans_classify(&feats, k, config.kmeans_restarts, config.master_seed)?;
        let report = classification_accuracy(&clusters, &truth, feats.ncols())?;
        let prds = originals
            .iter()
            .zip(frames)
            .map(|(x, xh)| prd(x, xh))
            .collect::<Result<Vec<_>>>()?;
        let mean_prd = prds.iter().sum::<f64>() / prds.len() as f64;

        let mut scatter = Table::new(
            "classify",
            config,
            &format!("method={label} M={m}"),
            &["f1", "f2", "f3", "cluster", "truth"],
        );
        for (i, (&c, &t)) in clusters.iter().zip(&truth).enumerate() {
            let f = |j: usize| if j < feats.ncols() { num(feats[(i, j)]) } else { num(0.0) };
            scatter.row(&[f(0), f(1), f(2), c.to_string(), t.to_string()]);
        }
        manifest
            .outputs
            .push(scatter.write(&config.output_dir, &format!("classify_scatter_{label}.csv"), label)?);
        summary.row(&[
            label.clone(),
            num(report.accuracy),
            num(mean_prd),
            report.features_used.to_string(),
        ]);
        results.push(ClassificationSummary {
            method: label.clone(),
            mean_prd,
            report,
        });
    }
    manifest
        .outputs
        .push(summary.write(&config.output_dir, "classify_summary.csv", "-")?);
    for (pm, (_, _, nc, solves)) in methods.iter().zip(sets.iter().skip(1)) {
        manifest.methods.push(method_info(pm, *nc, *solves));
    }
    manifest.write(&config.output_dir)?;
    Ok(ClassificationRun { results, manifest })
}
