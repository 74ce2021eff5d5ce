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

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Principal-component features of a set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFeatures {
    pub mean: DVector<f64>,
    /// `n x k` loadings, one component per column.
    pub components: DMatrix<f64>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `N x k` projections of the centered frames.
    pub features: DMatrix<f64>,
    /// Numerical rank of the covariance. Components past it are zero columns.
    pub rank: usize,
}

impl PcaFeatures {
    pub fn project(&self, frame: &[f64]) -> DVector<f64> {
        let centered = DVector::from_column_slice(frame) - &self.mean;
        self.components.tr_mul(&centered)
    }

    /// Maps features back to signal space: `mean + components · f`.
    pub fn reconstruct(&self, features: &DVector<f64>) -> DVector<f64> {
        &self.mean + &self.components * features
    }
}

fn frame_matrix<F: AsRef<[f64]>>(frames: &[F]) -> Result<DMatrix<f64>> {
    let n = frames.first().map_or(0, |f| f.as_ref().len());
    for f in frames {
        if f.as_ref().len() != n {
            return Err(Error::DimensionMismatch {
                what: "frame length",
                expected: n,
                got: f.as_ref().len(),
            });
        }
    }
    Ok(DMatrix::from_fn(frames.len(), n, |i, j| frames[i].as_ref()[j]))
}

/// Projects mean-centered frames onto the top `num_components` eigenvectors
/// of the sample covariance. Each component is signed so that its
/// largest-magnitude loading is positive.
pub fn pca_features<F: AsRef<[f64]>>(frames: &[F], num_components: usize) -> Result<PcaFeatures> {
    if frames.len() < 2 {
        return Err(Error::InvalidArgument("PCA needs at least 2 frames".into()));
    }
    let data = frame_matrix(frames)?;
    let (count, n) = data.shape();
    if num_components == 0 || num_components > n {
        return Err(Error::InvalidArgument(format!(
            "num_components must be in 1..={n}, got {num_components}"
        )));
    }
    let mean = DVector::from_iterator(n, data.column_iter().map(|c| c.mean()));
    let mut centered = data;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.tr_mul(&centered) / (count as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let top = eigenvalues[0].max(0.0);
    let rank_tol = top * n as f64 * f64::EPSILON * 16.0;
    let rank = eigenvalues.iter().filter(|&&v| v > rank_tol).count();

    let mut components = DMatrix::zeros(n, num_components);
    for (k, &i) in order.iter().take(num_components.min(rank)).enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let lead = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            v = -v;
        }
        components.set_column(k, &v);
    }
    let features = &centered * &components;
    Ok(PcaFeatures {
        mean,
        components,
        eigenvalues,
        features,
        rank,
    })
}

/// Orthonormal Haar decomposition of a zero-padded power-of-two signal,
/// ordered coarse to fine: `[approx, detail_coarsest, ..., detail_finest]`.
fn haar_transform(signal: &[f64]) -> Vec<f64> {
    let len = signal.len().next_power_of_two();
    let mut data = signal.to_vec();
    data.resize(len, 0.0);
    let mut out = vec![0.0; len];
    let mut width = len;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    while width > 1 {
        let half = width / 2;
        for i in 0..half {
            out[i] = s * (data[2 * i] + data[2 * i + 1]);
            out[half + i] = s * (data[2 * i] - data[2 * i + 1]);
        }
        data[..width].copy_from_slice(&out[..width]);
        width = half;
    }
    data
}

/// The `num` Haar coefficients with the largest variance across frames.
/// Returns an `N x num` matrix; columns ordered by decreasing variance.
pub fn haar_features<F: AsRef<[f64]>>(frames: &[F], num: usize) -> Result<DMatrix<f64>> {
    if frames.len() < 2 {
        return Err(Error::InvalidArgument("wavelet features need at least 2 frames".into()));
    }
    let coeffs: Vec<Vec<f64>> = frames.iter().map(|f| haar_transform(f.as_ref())).collect();
    let width = coeffs[0].len();
    if coeffs.iter().any(|c| c.len() != width) {
        return Err(Error::InvalidArgument("frames differ in length".into()));
    }
    if num == 0 || num > width {
        return Err(Error::InvalidArgument(format!("num must be in 1..={width}")));
    }
    let count = coeffs.len() as f64;
    let variance: Vec<f64> = (0..width)
        .map(|j| {
            let mean = coeffs.iter().map(|c| c[j]).sum::<f64>() / count;
            coeffs.iter().map(|c| (c[j] - mean).powi(2)).sum::<f64>() / (count - 1.0)
        })
        .collect();
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| variance[b].total_cmp(&variance[a]).then(a.cmp(&b)));
    Ok(DMatrix::from_fn(coeffs.len(), num, |i, k| coeffs[i][order[k]]))
}
