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


//! Reconstruction quality versus measurement count.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{num, MethodInfo, Table};
use super::{prepare, prepare_methods, with_pool, ExperimentConfig, Manifest, Method, PreparedMethod};
use crate::error::Result;
use crate::eval::{good_probability, prd, ReconstructionReport};
use crate::prior::ModelRecord;
use crate::sensing::{bernoulli_matrix, measure, noise_seed, trial_seed, SensingMatrix};
use crate::solver::Reconstructor;

pub const SWEEP_HEADER: &[&str] = &[
    "M",
    "mean_prd",
    "good_probability",
    "q25",
    "median",
    "q75",
    "min",
    "max",
    "good_probability_trial_mean",
];

/// Statistics pooled over every (trial, spike) pair at one measurement count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub mean_prd: f64,
    pub good_probability: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
    /// Good probability computed per trial, then averaged.
    pub good_probability_trial_mean: f64,
}

impl SweepRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            num(self.mean_prd),
            num(self.good_probability),
            num(self.q25),
            num(self.median),
            num(self.q75),
            num(self.min),
            num(self.max),
            num(self.good_probability_trial_mean),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    /// `(method label, one row per M)` in config order.
    pub methods: Vec<(String, Vec<SweepRow>)>,
    pub manifest: Manifest,
}

impl SweepRun {
    pub fn rows(&self, label: &str) -> Option<&[SweepRow]> {
        self.methods.iter().find(|(l, _)| l == label).map(|(_, r)| r.as_slice())
    }
}

struct Outcome {
    prd: f64,
    converged: bool,
}

fn solve_spike(
    config: &ExperimentConfig,
    methods: &[PreparedMethod],
    recs: &[Reconstructor],
    phi: &SensingMatrix,
    x: &DVector<f64>,
    seed: u64,
) -> Result<Vec<Outcome>> {
    let y = measure(phi, x, config.measurement_noise, seed)?.values;
    let solver = config.solver();
    methods
        .iter()
        .zip(recs)
        .map(|(pm, rec)| {
            let r = rec
                .solve(&y, &pm.weights, &solver)
                .map_err(|e| e.context(format!("method {}", pm.label)))?;
            Ok(Outcome {
                prd: prd(x.as_slice(), r.x_hat.as_slice())
                    .map_err(|e| e.context(format!("method {}", pm.label)))?,
                converged: r.converged,
            })
        })
        .collect()
}

/// Runs every configured method at every measurement count over `trials`
/// fresh sensing matrices, writes `sweep_<method>.csv` per method and
/// `sweep_manifest.json`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepRun> {
    config.validate()?;
    let weighted = config
        .methods
        .iter()
        .any(|m| Method::parse(m, &config.orders).is_ok_and(|m| m.weighted));
    let prep = prepare(config, weighted)?;
    let methods = prepare_methods(config, &prep.training)?;
    let n = config.n;
    let seeds: Vec<u64> = (0..config.trials).map(|t| trial_seed(config.master_seed, t)).collect();
    let frames: Vec<DVector<f64>> = prep
        .evaluation
        .iter()
        .map(|f| DVector::from_column_slice(&f.samples))
        .collect();
    let spikes = frames.len();

    let mut rows: Vec<Vec<SweepRow>> = vec![Vec::new(); methods.len()];
    let mut non_converged = vec![0usize; methods.len()];
    let mut solves = vec![0usize; methods.len()];
    for &m in &config.measurements {
        let phis = seeds
            .iter()
            .map(|&s| bernoulli_matrix(m, n, s))
            .collect::<Result<Vec<_>>>()?;
        let recs = phis
            .iter()
            .map(|phi| {
                methods
                    .iter()
                    .map(|pm| Reconstructor::new(phi, &pm.dict))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let tasks: Vec<(usize, usize)> =
            (0..config.trials).flat_map(|t| (0..spikes).map(move |i| (t, i))).collect();
        let outcomes = with_pool(config, || {
            tasks
                .par_iter()
                .map(|&(t, i)| {
                    solve_spike(config, &methods, &recs[t], &phis[t], &frames[i], noise_seed(seeds[t], i))
                        .map_err(|e| e.context(format!("M={m} trial={t} spike={i}")))
                })
                .collect::<Result<Vec<_>>>()
        })??;

        for (k, out) in rows.iter_mut().enumerate() {
            let prds: Vec<f64> = outcomes.iter().map(|o| o[k].prd).collect();
            non_converged[k] += outcomes.iter().filter(|o| !o[k].converged).count();
            solves[k] += outcomes.len();
            let per_trial = prds
                .chunks(spikes)
                .map(|c| good_probability(c, config.good_threshold))
                .collect::<Result<Vec<_>>>()?;
            let report = ReconstructionReport::from_prds(prds, m, config.good_threshold)?;
            out.push(SweepRow {
                m,
                mean_prd: report.mean_prd,
                good_probability: report.good_probability,
                q25: report.quartiles.0,
                median: report.quartiles.1,
                q75: report.quartiles.2,
                min: report.min,
                max: report.max,
                good_probability_trial_mean: per_trial.iter().sum::<f64>() / per_trial.len() as f64,
            });
        }
    }

    let mut manifest = Manifest::new("sweep", config);
    manifest.dataset = Some(prep.summary(config));
    manifest.trial_seeds = seeds;
    for (k, pm) in methods.iter().enumerate() {
        let mut table = Table::new("sweep", config, &format!("method={}", pm.label), SWEEP_HEADER);
        for r in &rows[k] {
            table.row(&r.fields());
        }
        manifest
            .outputs
            .push(table.write(&config.output_dir, &format!("sweep_{}.csv", pm.label), &pm.label)?);
        manifest.methods.push(method_info(pm, non_converged[k], solves[k]));
    }
    manifest.write(&config.output_dir)?;
    Ok(SweepRun {
        methods: methods.iter().map(|pm| pm.label.clone()).zip(rows).collect(),
        manifest,
    })
}

pub(crate) fn method_info(pm: &PreparedMethod, non_converged: usize, solves: usize) -> MethodInfo {
    MethodInfo {
        label: pm.label.clone(),
        dictionary: pm.dict.label(),
        dictionary_rows: pm.dict.rows(),
        group_weights: pm
            .weights
            .values
            .as_slice()
            .chunks(pm.dict.frame_length)
            .take(pm.dict.orders().len().max(1))
            .map(|g| g[0])
            .collect(),
        model: pm.model.as_ref().map(ModelRecord::from),
        non_converged,
        solves,
    }
}
