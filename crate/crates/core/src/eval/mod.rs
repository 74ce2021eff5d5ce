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

//! Reconstruction-quality and classification metrics.

mod classify;
mod features;
mod kmeans;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{classification_accuracy, ClassificationReport, MAX_CLASSES};
pub use features::{haar_features, pca_features, PcaFeatures};
pub use kmeans::kmeans_classify;

/// PRD below this percentage counts as a good reconstruction.
pub const GOOD_PRD_THRESHOLD: f64 = 5.0;
/// Default co-sparsity tolerance, relative to `‖z‖∞`.
pub const DEFAULT_COSPARSITY_TOL: f64 = 1e-3;

/// Percentage root-mean-square difference `100 · ‖x − x̂‖ / ‖x‖`.
pub fn prd(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            what: "reconstruction length",
            expected: x.len(),
            got: x_hat.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedPrd);
    }
    let diff = x
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * diff / norm)
}

/// Percentage of PRD values strictly below `threshold`.
pub fn good_probability(prds: &[f64], threshold: f64) -> Result<f64> {
    if prds.is_empty() {
        return Err(Error::Empty("PRD list"));
    }
    let good = prds.iter().filter(|&&p| p < threshold).count();
    Ok(100.0 * good as f64 / prds.len() as f64)
}

/// Number of entries with `|z_i| ≤ tol · ‖z‖∞` (exact zeros when `tol = 0`).
pub fn co_sparsity(z: &[f64], tol: f64) -> usize {
    let cut = tol * z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    z.iter().filter(|v| v.abs() <= cut).count()
}

/// Linearly interpolated sample quantile (`p` in `[0, 1]`) of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub per_spike_prd: Vec<f64>,
    pub mean_prd: f64,
    pub good_probability: f64,
    /// `(q25, median, q75)`.
    pub quartiles: (f64, f64, f64),
    pub min: f64,
    pub max: f64,
    pub num_measurements: usize,
}

impl ReconstructionReport {
    pub fn from_prds(per_spike_prd: Vec<f64>, num_measurements: usize, threshold: f64) -> Result<Self> {
        let good_probability = good_probability(&per_spike_prd, threshold)?;
        let mut sorted = per_spike_prd.clone();
        sorted.sort_by(f64::total_cmp);
        let mean_prd = per_spike_prd.iter().sum::<f64>() / per_spike_prd.len() as f64;
        Ok(ReconstructionReport {
            mean_prd,
            good_probability,
            quartiles: (
                quantile_sorted(&sorted, 0.25),
                quantile_sorted(&sorted, 0.5),
                quantile_sorted(&sorted, 0.75),
            ),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            per_spike_prd,
            num_measurements,
        })
    }
}
