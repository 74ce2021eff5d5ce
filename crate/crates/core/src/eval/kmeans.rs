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

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_LLOYD_ITERS: usize = 300;

fn sq_dist(data: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    data.row(i)
        .iter()
        .zip(centers.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Nearest center, lowest index on ties.
fn nearest(data: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    (0..centers.nrows())
        .map(|c| (c, sq_dist(data, i, centers, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus_seed(data: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (count, dim) = data.shape();
    let mut centers = DMatrix::zeros(k, dim);
    centers.set_row(0, &data.row(rng.random_range(0..count)));
    let mut d2: Vec<f64> = (0..count).map(|i| sq_dist(data, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = count - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.random_range(0..count)
        };
        centers.set_row(c, &data.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(data, i, &centers, c));
        }
    }
    centers
}

fn lloyd(data: &DMatrix<f64>, mut centers: DMatrix<f64>) -> (Vec<usize>, f64) {
    let (count, dim) = data.shape();
    let k = centers.nrows();
    let mut labels = vec![usize::MAX; count];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let (c, _) = nearest(data, i, &centers);
            if *label != c {
                *label = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut sizes = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            sizes[c] += 1;
            let mut row = sums.row_mut(c);
            row += data.row(i);
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centers.set_row(c, &(sums.row(c) / sizes[c] as f64));
            } else {
                // move an empty center onto the worst-served point
                let far = (0..count)
                    .map(|i| (i, sq_dist(data, i, &centers, labels[i])))
                    .fold((0, -1.0), |b, cur| if cur.1 > b.1 { cur } else { b })
                    .0;
                centers.set_row(c, &data.row(far));
            }
        }
    }
    let inertia = (0..count).map(|i| sq_dist(data, i, &centers, labels[i])).sum();
    (labels, inertia)
}

/// Best-of-`restarts` k-means on the rows of `features`, k-means++ seeding.
///
/// Cluster ids are renumbered in order of first appearance, so the output is
/// a deterministic function of `(features, k, restarts, seed)`.
pub fn kmeans_classify(features: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<Vec<u32>> {
    let count = features.nrows();
    if count == 0 {
        return Err(Error::Empty("features"));
    }
    if k == 0 || k > count {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={count}, got {k}"
        )));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let (labels, inertia) = lloyd(features, plus_plus_seed(features, k, &mut rng));
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    let labels = best.expect("at least one restart").0;
    let mut remap = vec![u32::MAX; k];
    let mut next = 0;
    Ok(labels
        .into_iter()
        .map(|c| {
            if remap[c] == u32::MAX {
                remap[c] = next;
                next += 1;
            }
            remap[c]
        })
        .collect())
}
