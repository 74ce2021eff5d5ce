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

//! Random Bernoulli sensing and the linear measurement model `y = Φx + e`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// `m x n` matrix with i.i.d. entries uniform over `{+s, -s}`, `s = 1/sqrt(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub scale: f64,
    pub matrix: DMatrix<f64>,
}

impl SensingMatrix {
    /// Compression ratio `m / n`.
    pub fn ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// False once `m > n`; such matrices are accepted but no longer compress.
    pub fn is_compressive(&self) -> bool {
        self.m <= self.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub values: DVector<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub fn bernoulli_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidShape(format!(
            "sensing matrix needs m, n >= 1 (got m={m}, n={n})"
        )));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Draw in row-major order so the stream layout does not depend on storage order.
    let entries: Vec<f64> = (0..m * n)
        .map(|_| if rng.random::<bool>() { scale } else { -scale })
        .collect();
    Ok(SensingMatrix {
        m,
        n,
        seed,
        scale,
        matrix: DMatrix::from_row_slice(m, n, &entries),
    })
}

pub fn measure(
    phi: &SensingMatrix,
    x: &DVector<f64>,
    noise_sigma: f64,
    seed: u64,
) -> Result<MeasurementVector> {
    if x.len() != phi.n {
        return Err(Error::DimensionMismatch {
            what: "signal length vs sensing matrix columns",
            expected: phi.n,
            got: x.len(),
        });
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut values = &phi.matrix * x;
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).expect("sigma checked above");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in values.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(MeasurementVector {
        values,
        noise_sigma,
        seed,
    })
}

/// Seed of the sensing matrix used in trial `trial`: `master + trial`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master.wrapping_add(trial as u64)
}

/// Seed of the measurement noise for one spike within a trial.
pub fn noise_seed(trial_seed: u64, spike_index: usize) -> u64 {
    trial_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(spike_index as u64 + 1)
}
