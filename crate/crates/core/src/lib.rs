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

//! Compressed sensing of neural spike frames under a co-sparse analysis
//! model.
//!
//! Frames are measured with seeded random Bernoulli matrices and recovered
//! by (weighted) analysis ℓ1 minimization over a stack of integer- or
//! fractional-order difference operators. The weights come from a small
//! training stage that fits a log-quadratic variance law across orders.
//!
//! Modules, bottom up:
//! - [`fracdiff`]: difference coefficients, matrices, stacked dictionaries.
//! - [`sensing`]: Bernoulli sensing matrices and noisy measurements.
//! - [`prior`]: per-order Laplacian deviations, variance law, weights.
//! - [`solver`]: ADMM solver for the weighted/unweighted programs.
//! - [`signal`]: frames, datasets, file formats, detection, synthetic data.
//! - [`eval`]: PRD, good-reconstruction rate, co-sparsity, PCA, k-means.
//! - [`experiment`]: the seeded sweep, classification and training runs.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod fracdiff;
pub mod matrix_io;
pub mod prior;
pub mod sensing;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
