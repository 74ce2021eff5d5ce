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

//! Training stage: per-order Laplacian deviations, the log-quadratic
//! variance law across orders, and the grouped weights derived from it.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracdiff::difference_matrix;

pub const DEFAULT_CLIP_RATIO: f64 = 1e4;
pub const DEFAULT_TRAINING_FRAMES: usize = 100;

/// Fitted law `σ²(f) = c · 2^(-2af² - 2bf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVarianceModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub per_order_sigma: Vec<(f64, f64)>,
    /// RMS residual of the fit in the `log2 σ²` domain.
    pub residual: f64,
}

impl OrderVarianceModel {
    pub fn log2_variance(&self, order: f64) -> f64 {
        self.c.log2() - 2.0 * self.a * order * order - 2.0 * self.b * order
    }

    pub fn sigma(&self, order: f64) -> f64 {
        (0.5 * self.log2_variance(order)).exp2()
    }

    /// Flat model (`a = b = 0`, `c = 1`): all weights equal one.
    pub fn flat() -> Self {
        OrderVarianceModel {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            per_order_sigma: Vec::new(),
            residual: 0.0,
        }
    }
}

/// Weights laid out as `q` contiguous, equal-valued groups of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub values: DVector<f64>,
    pub group_len: usize,
}

impl WeightVector {
    pub fn uniform(len: usize) -> Self {
        WeightVector {
            values: DVector::from_element(len, 1.0),
            group_len: len.max(1),
        }
    }

    pub fn from_groups(group_values: &[f64], n: usize) -> Self {
        let values = DVector::from_iterator(
            group_values.len() * n,
            group_values.iter().flat_map(|&w| std::iter::repeat_n(w, n)),
        );
        WeightVector {
            values,
            group_len: n,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn group_values(&self) -> Vec<f64> {
        self.values
            .as_slice()
            .chunks(self.group_len)
            .map(|g| g[0])
            .collect()
    }

    /// Rescaled copy with unit mean. The relative weighting is unchanged.
    pub fn normalized(&self) -> Self {
        let mean = self.values.mean();
        WeightVector {
            values: &self.values / mean,
            group_len: self.group_len,
        }
    }
}

/// Laplacian maximum-likelihood standard deviation of the pooled order-`order`
/// analysis coefficients of all frames: `σ = sqrt(2) · mean|z|`.
pub fn estimate_order_sigma<F: AsRef<[f64]>>(frames: &[F], order: f64) -> Result<f64> {
    let first = frames.first().ok_or(Error::Empty("training frames"))?;
    let n = first.as_ref().len();
    if n == 0 {
        return Err(Error::Empty("training frame samples"));
    }
    let d = difference_matrix(order, n)?;
    let mut abs_sum = 0.0;
    for (i, frame) in frames.iter().enumerate() {
        let frame = frame.as_ref();
        if frame.len() != n {
            return Err(Error::DimensionMismatch {
                what: "training frame length",
                expected: n,
                got: frame.len(),
            })
            .map_err(|e: Error| e.context(format!("frame {i}")));
        }
        let z = &d * DVector::from_column_slice(frame);
        abs_sum += z.iter().map(|v| v.abs()).sum::<f64>();
    }
    let mean_abs = abs_sum / (frames.len() * n) as f64;
    if mean_abs == 0.0 {
        return Err(Error::DegenerateSigma { order });
    }
    Ok(std::f64::consts::SQRT_2 * mean_abs)
}

/// Least-squares fit of `log2 σ² = log2 c - 2af² - 2bf` over all points.
pub fn fit_variance_model(points: &[(f64, f64)]) -> Result<OrderVarianceModel> {
    if points.len() < 3 {
        return Err(Error::UnderdeterminedFit(format!(
            "need at least 3 (order, sigma) points, got {}",
            points.len()
        )));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::UnderdeterminedFit(format!(
            "need at least 3 distinct orders, got {}",
            distinct.len()
        )));
    }
    for &(f, s) in points {
        if !(f.is_finite() && s.is_finite() && s > 0.0) {
            return Err(Error::NonFiniteModel(format!("point (f={f}, sigma={s})")));
        }
    }
    let design = DMatrix::from_fn(points.len(), 3, |i, j| {
        let f = points[i].0;
        match j {
            0 => -2.0 * f * f,
            1 => -2.0 * f,
            _ => 1.0,
        }
    });
    let target = DVector::from_iterator(points.len(), points.iter().map(|&(_, s)| (s * s).log2()));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-12 {
        return Err(Error::UnderdeterminedFit("rank-deficient design".into()));
    }
    let params = svd
        .solve(&target, 0.0)
        .map_err(|e| Error::UnderdeterminedFit(e.to_string()))?;
    let resid = &design * &params - &target;
    let residual = (resid.norm_squared() / points.len() as f64).sqrt();
    let model = OrderVarianceModel {
        a: params[0],
        b: params[1],
        c: params[2].exp2(),
        per_order_sigma: points.to_vec(),
        residual,
    };
    if !(model.a.is_finite() && model.b.is_finite() && model.c.is_finite() && model.c > 0.0) {
        return Err(Error::NonFiniteModel(format!(
            "a={}, b={}, c={}",
            model.a, model.b, model.c
        )));
    }
    Ok(model)
}

/// Estimates one σ per order and fits the variance law through them.
pub fn train_model<F: AsRef<[f64]> + Sync>(frames: &[F], orders: &[f64]) -> Result<OrderVarianceModel> {
    use rayon::prelude::*;
    let points = orders
        .par_iter()
        .map(|&f| estimate_order_sigma(frames, f).map(|s| (f, s)))
        .collect::<Result<Vec<_>>>()?;
    fit_variance_model(&points)
}

/// Group weights `1/σ(f_i) = 2^(a f_i² + b f_i) / sqrt(c)`, each replicated `n` times,
/// with the largest weights capped at `clip_ratio` times the smallest.
pub fn build_weights(
    model: &OrderVarianceModel,
    orders: &[f64],
    n: usize,
    clip_ratio: f64,
) -> Result<WeightVector> {
    for (name, v) in [("a", model.a), ("b", model.b), ("c", model.c)] {
        if !v.is_finite() {
            return Err(Error::NonFiniteModel(format!("{name} = {v}")));
        }
    }
    if model.c <= 0.0 {
        return Err(Error::NonFiniteModel(format!("c = {} must be positive", model.c)));
    }
    if !(clip_ratio >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "clip ratio must be >= 1, got {clip_ratio}"
        )));
    }
    // Evaluate in the log domain so that a huge exponent shows up as non-finite.
    let mut groups = Vec::with_capacity(orders.len());
    for &f in orders {
        let log2_w = model.a * f * f + model.b * f - 0.5 * model.c.log2();
        let w = log2_w.exp2();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NonFiniteModel(format!("weight for order {f} = {w}")));
        }
        groups.push(w);
    }
    if let Some(min) = groups.iter().copied().reduce(f64::min) {
        let cap = min * clip_ratio;
        for w in &mut groups {
            *w = w.min(cap);
        }
    }
    Ok(WeightVector::from_groups(&groups, n))
}

/// On-disk form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual: f64,
    pub orders: Vec<f64>,
    pub sigmas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl From<&OrderVarianceModel> for ModelRecord {
    fn from(m: &OrderVarianceModel) -> Self {
        ModelRecord {
            a: m.a,
            b: m.b,
            c: m.c,
            residual: m.residual,
            orders: m.per_order_sigma.iter().map(|p| p.0).collect(),
            sigmas: m.per_order_sigma.iter().map(|p| p.1).collect(),
            master_seed: None,
            config_hash: None,
        }
    }
}

impl ModelRecord {
    pub fn into_model(self) -> Result<OrderVarianceModel> {
        if self.orders.len() != self.sigmas.len() {
            return Err(Error::Format(format!(
                "model record has {} orders but {} sigmas",
                self.orders.len(),
                self.sigmas.len()
            )));
        }
        Ok(OrderVarianceModel {
            a: self.a,
            b: self.b,
            c: self.c,
            per_order_sigma: self.orders.into_iter().zip(self.sigmas).collect(),
            residual: self.residual,
        })
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("model record is always representable")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("model record: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
