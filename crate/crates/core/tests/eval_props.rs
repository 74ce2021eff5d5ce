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


mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikecs::eval::{
    classification_accuracy, co_sparsity, good_probability, haar_features, kmeans_classify,
    pca_features, prd, ReconstructionReport,
};

fn random_frames(count: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

#[test]
fn pca_eigenvalues_match_jacobi() {
    let frames = random_frames(60, 12, 4);
    let pca = pca_features(&frames, 5).unwrap();
    let data = DMatrix::from_fn(60, 12, |i, j| frames[i][j]);
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(60, 12, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.tr_mul(&centered) / 59.0;
    let mut expected = common::jacobi_eigenvalues(&cov);
    let mut got = pca.eigenvalues.clone();
    // Normalization may be 1/N or 1/(N-1); compare shapes, then the top value.
    let ratio = got[0] / expected[0];
    assert!((ratio - 1.0).abs() < 1e-9 || (ratio - 59.0 / 60.0).abs() < 1e-9, "{ratio}");
    for v in got.iter_mut() {
        *v /= ratio;
    }
    expected.truncate(got.len());
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() <= 1e-9 * expected[0], "{g} vs {e}");
    }
    // Loadings are orthonormal.
    let gram = pca.components.tr_mul(&pca.components);
    assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-10);
}

#[test]
fn pca_reconstruction_is_exact_with_all_components() {
    let frames = random_frames(30, 8, 9);
    let pca = pca_features(&frames, 8).unwrap();
    for f in &frames {
        let back = pca.reconstruct(&pca.project(f));
        assert!(back.iter().zip(f).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}

#[test]
fn haar_features_shape_and_errors() {
    let frames = random_frames(20, 16, 1);
    let h = haar_features(&frames, 6).unwrap();
    assert_eq!(h.shape(), (20, 6));
    assert!(haar_features(&frames[..1], 2).is_err());
    assert!(pca_features(&frames, 0).is_err());
    assert!(pca_features(&frames, 17).is_err());
}

#[test]
fn kmeans_separates_well_spaced_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers = [(-10.0, 0.0), (10.0, 0.0), (0.0, 15.0)];
    let mut truth = Vec::new();
    let data = DMatrix::from_fn(90, 2, |i, j| {
        let c = centers[i % 3];
        (if j == 0 { c.0 } else { c.1 }) + rng.random_range(-1.0..1.0)
    });
    for i in 0..90 {
        truth.push((i % 3) as u32 + 10);
    }
    let labels = kmeans_classify(&data, 3, 5, 42).unwrap();
    assert_eq!(labels, kmeans_classify(&data, 3, 5, 42).unwrap());
    let report = classification_accuracy(&labels, &truth, 2).unwrap();
    assert_eq!(report.accuracy, 100.0);
    assert!(kmeans_classify(&data, 0, 1, 0).is_err());
    assert!(kmeans_classify(&data, 91, 1, 0).is_err());
}

#[test]
fn report_quartiles() {
    let r = ReconstructionReport::from_prds(vec![4.0, 1.0, 3.0, 2.0, 10.0], 16, 5.0).unwrap();
    assert_eq!(r.mean_prd, 4.0);
    assert_eq!(r.good_probability, 80.0);
    assert_eq!(r.quartiles, (2.0, 3.0, 4.0));
    assert_eq!((r.min, r.max), (1.0, 10.0));
    assert!(ReconstructionReport::from_prds(vec![], 16, 5.0).is_err());
}

#[test]
fn prd_errors() {
    assert!(prd(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    assert!(prd(&[1.0], &[1.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn prd_is_scale_invariant(
        x in prop::collection::vec(-5.0f64..5.0, 8),
        e in prop::collection::vec(-1.0f64..1.0, 8),
        s in 0.01f64..100.0,
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 0.1));
        let xh: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + b).collect();
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        let xhs: Vec<f64> = xh.iter().map(|v| v * s).collect();
        let p = prd(&x, &xh).unwrap();
        prop_assert!((p - prd(&xs, &xhs).unwrap()).abs() <= 1e-9 * p.max(1.0));
        prop_assert_eq!(prd(&x, &x).unwrap(), 0.0);
        prop_assert!(p >= 0.0);
    }

    #[test]
    fn good_probability_is_a_percentage(prds in prop::collection::vec(0.0f64..20.0, 1..50), t in 0.0f64..20.0) {
        let g = good_probability(&prds, t).unwrap();
        let expected = 100.0 * prds.iter().filter(|&&p| p < t).count() as f64 / prds.len() as f64;
        prop_assert!((0.0..=100.0).contains(&g));
        prop_assert_eq!(g, expected);
    }

    #[test]
    fn co_sparsity_bounds(z in prop::collection::vec(-3.0f64..3.0, 1..40), tol in 0.0f64..1.0) {
        let k = co_sparsity(&z, tol);
        prop_assert!(k <= z.len());
        prop_assert_eq!(co_sparsity(&z, 1.0), z.len());
        prop_assert!(co_sparsity(&z, tol / 2.0) <= k);
    }

    #[test]
    fn accuracy_is_label_permutation_invariant(
        truth in prop::collection::vec(0u32..3, 3..40),
        perm in Just([2u32, 0, 1]),
    ) {
        let relabeled: Vec<u32> = truth.iter().map(|&t| perm[t as usize]).collect();
        let r = classification_accuracy(&relabeled, &truth, 1).unwrap();
        prop_assert_eq!(r.accuracy, 100.0);
    }

    #[test]
    fn accuracy_beats_chance_floor(
        pred in prop::collection::vec(0u32..3, 30),
        truth in prop::collection::vec(0u32..3, 30),
    ) {
        // The best mapping is at least as good as the identity mapping.
        let r = classification_accuracy(&pred, &truth, 1).unwrap();
        let identity = 100.0 * pred.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / 30.0;
        prop_assert!(r.accuracy + 1e-9 >= identity);
        prop_assert!(r.accuracy <= 100.0);
    }
}
