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

//! Integer- and fractional-order difference operators and the stacked
//! analysis dictionaries built from them.
//!
//! The order-`f` difference of a frame is the one-sided sum
//! `sum_k c_k x_{i+k}` with `c_k = (-1)^k Γ(f+1) / (k! Γ(f-k+1))`. Near the
//! end of the frame the sum runs out of samples; those rows are truncated so
//! that every difference matrix stays square, upper-triangular Toeplitz with
//! a unit diagonal.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recommended band for the maximum order distance of a dictionary.
pub const RECOMMENDED_DISTANCE: (f64, f64) = (0.25, 0.5);

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceCoefficients {
    pub order: f64,
    pub coeffs: Vec<f64>,
}

fn check_order(order: f64) -> Result<()> {
    if order.is_finite() && order >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// First `len` coefficients of the order-`order` difference sequence.
///
/// Uses the recurrence `c_{k+1} = c_k (k - f) / (k + 1)`; the gamma quotient
/// overflows long before frame lengths of practical interest.
pub fn fod_coefficients(order: f64, len: usize) -> Result<DifferenceCoefficients> {
    check_order(order)?;
    if len == 0 {
        return Err(Error::InvalidShape("coefficient length must be >= 1".into()));
    }
    let mut coeffs = Vec::with_capacity(len);
    let mut c = 1.0_f64;
    for k in 0..len {
        coeffs.push(c);
        let kf = k as f64;
        // Multiply before dividing so integer orders stay exact.
        c = c * (kf - order) / (kf + 1.0);
    }
    Ok(DifferenceCoefficients { order, coeffs })
}

/// The `n x n` truncated difference matrix of the given order.
pub fn difference_matrix(order: f64, n: usize) -> Result<DMatrix<f64>> {
    let c = fod_coefficients(order, n)?.coeffs;
    Ok(DMatrix::from_fn(n, n, |i, j| if j >= i { c[j - i] } else { 0.0 }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictionaryKind {
    /// Stack of difference matrices, one block per order, in the given sequence.
    Difference { orders: Vec<f64> },
    /// Random tight frame baseline.
    RandomTightFrame { seed: u64 },
}

/// An `l x n` analysis operator.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisDictionary {
    pub kind: DictionaryKind,
    pub frame_length: usize,
    pub matrix: DMatrix<f64>,
    /// Multiplier applied to every block (`1/sqrt(q)` for difference stacks).
    pub scale: f64,
}

impl AnalysisDictionary {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Redundancy ratio `l / n`.
    pub fn redundancy(&self) -> f64 {
        self.rows() as f64 / self.frame_length as f64
    }

    /// The order set, empty for a random tight frame.
    pub fn orders(&self) -> &[f64] {
        match &self.kind {
            DictionaryKind::Difference { orders } => orders,
            DictionaryKind::RandomTightFrame { .. } => &[],
        }
    }

    /// Row block `i` of a difference stack, including the `1/sqrt(q)` scale.
    pub fn block(&self, i: usize) -> Option<DMatrix<f64>> {
        if i >= self.orders().len() {
            return None;
        }
        let n = self.frame_length;
        Some(self.matrix.rows(i * n, n).into_owned())
    }

    /// Short label such as `3.5-4-4.5` or `rtf`.
    pub fn label(&self) -> String {
        match &self.kind {
            DictionaryKind::Difference { orders } => orders
                .iter()
                .map(|f| format!("{f}"))
                .collect::<Vec<_>>()
                .join("-"),
            DictionaryKind::RandomTightFrame { .. } => "rtf".to_string(),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        apply_analysis(self, x)
    }
}

/// Stacks the difference matrices of `orders` and scales by `1/sqrt(q)`.
pub fn build_mfod(orders: &[f64], n: usize) -> Result<AnalysisDictionary> {
    if orders.is_empty() {
        return Err(Error::InvalidOrderSet("order set is empty".into()));
    }
    if n == 0 {
        return Err(Error::InvalidShape("frame length must be >= 1".into()));
    }
    for &f in orders {
        check_order(f)?;
    }
    for (i, a) in orders.iter().enumerate() {
        if orders[i + 1..].contains(a) {
            return Err(Error::InvalidOrderSet(format!("duplicate order {a}")));
        }
    }
    let q = orders.len();
    let scale = 1.0 / (q as f64).sqrt();
    let mut matrix = DMatrix::zeros(q * n, n);
    for (i, &f) in orders.iter().enumerate() {
        let block = difference_matrix(f, n)? * scale;
        matrix.rows_mut(i * n, n).copy_from(&block);
    }
    Ok(AnalysisDictionary {
        kind: DictionaryKind::Difference {
            orders: orders.to_vec(),
        },
        frame_length: n,
        matrix,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderDistanceReport {
    pub max_distance: f64,
    pub within_recommended: bool,
}

/// Largest pairwise gap in the order set; 0 for a singleton.
pub fn order_distance(orders: &[f64]) -> OrderDistanceReport {
    let max_distance = match (
        orders.iter().copied().reduce(f64::min),
        orders.iter().copied().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) if orders.len() > 1 => hi - lo,
        _ => 0.0,
    };
    let (lo, hi) = RECOMMENDED_DISTANCE;
    OrderDistanceReport {
        max_distance,
        within_recommended: orders.len() > 1 && max_distance >= lo && max_distance <= hi,
    }
}

/// An `l x n` frame with orthonormal columns scaled so that `ΩᵀΩ = (l/n) I`.
pub fn build_random_tight_frame(l: usize, n: usize, seed: u64) -> Result<AnalysisDictionary> {
    if n == 0 || l < n {
        return Err(Error::InvalidShape(format!(
            "tight frame needs l >= n >= 1 (got l={l}, n={n})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = DMatrix::from_fn(l, n, |_, _| StandardNormal.sample(&mut rng));
    let q = gauss.qr().q();
    let scale = (l as f64 / n as f64).sqrt();
    Ok(AnalysisDictionary {
        kind: DictionaryKind::RandomTightFrame { seed },
        frame_length: n,
        matrix: q * scale,
        scale,
    })
}

/// Analysis coefficients `z = Ω x`.
pub fn apply_analysis(dict: &AnalysisDictionary, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != dict.frame_length {
        return Err(Error::DimensionMismatch {
            what: "signal length vs dictionary frame length",
            expected: dict.frame_length,
            got: x.len(),
        });
    }
    Ok(&dict.matrix * x)
}
