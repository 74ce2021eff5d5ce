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

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest class count handled by the exhaustive permutation search.
pub const MAX_CLASSES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Percentage of frames whose mapped cluster equals the true unit.
    pub accuracy: f64,
    /// `confusion[t][p]`: frames of true class `t` assigned to (mapped) class `p`.
    /// Classes are the sorted distinct truth labels, padded when there are more clusters.
    pub confusion: Vec<Vec<usize>>,
    pub features_used: usize,
    /// `mapping[c]` is the class index that predicted cluster `c` (sorted order) maps to.
    pub mapping: Vec<usize>,
}

fn index_labels(labels: &[u32]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<u32> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let idx = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect();
    (idx, distinct.len())
}

/// Calls `f` with every permutation of `0..k` in lexicographic order.
fn for_each_permutation(k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], f: &mut impl FnMut(&[usize])) {
        if prefix.len() == used.len() {
            f(prefix);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, f);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    go(&mut Vec::with_capacity(k), &mut vec![false; k], f);
}

/// Accuracy under the best one-to-one mapping of predicted clusters to true
/// units, found by exhaustive search over all `k!` mappings.
pub fn classification_accuracy(
    predicted: &[u32],
    truth: &[u32],
    features_used: usize,
) -> Result<ClassificationReport> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            what: "predicted vs truth labels",
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("labels"));
    }
    let (t_idx, kt) = index_labels(truth);
    let (p_idx, kp) = index_labels(predicted);
    let k = kt.max(kp);
    if k > MAX_CLASSES {
        return Err(Error::Unsupported(format!(
            "{k} classes exceeds the exhaustive-search limit of {MAX_CLASSES}"
        )));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&t, &p) in t_idx.iter().zip(&p_idx) {
        counts[t][p] += 1;
    }
    let mut best = (0usize, (0..k).collect::<Vec<_>>());
    for_each_permutation(k, &mut |perm| {
        let hits: usize = (0..k).map(|p| counts[perm[p]][p]).sum();
        if hits > best.0 {
            best = (hits, perm.to_vec());
        }
    });
    let mapping = best.1;
    let mut confusion = vec![vec![0usize; k]; k];
    for t in 0..k {
        for p in 0..k {
            confusion[t][mapping[p]] += counts[t][p];
        }
    }
    Ok(ClassificationReport {
        accuracy: 100.0 * best.0 as f64 / truth.len() as f64,
        confusion,
        features_used,
        mapping,
    })
}
