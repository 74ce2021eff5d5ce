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

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spikecs::fracdiff::{build_mfod, build_random_tight_frame};
use spikecs::prior::WeightVector;
use spikecs::sensing::bernoulli_matrix;
use spikecs::solver::{optimality_report, solve_al1, solve_walm, Reconstructor, SolverConfig};

fn tight() -> SolverConfig {
    SolverConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-9,
        max_iter: 100_000,
        ..SolverConfig::default()
    }
}

fn random_signal(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
}

#[test]
fn matches_primal_dual_reference() {
    let (n, m) = (32, 16);
    let dict = build_mfod(&[3.5, 4.0, 4.5], n).unwrap();
    for seed in 0..3u64 {
        let phi = bernoulli_matrix(m, n, seed).unwrap();
        let y = &phi.matrix * random_signal(n, 1000 + seed);
        let w = WeightVector {
            values: DVector::from_fn(dict.rows(), |i, _| 0.5 + (i % 7) as f64 * 0.25),
            group_len: 1,
        };
        let res = solve_walm(&y, &phi, &dict, &w, &tight()).unwrap();
        assert!(res.converged);
        let reference = common::primal_dual_reference(&y, &phi.matrix, &dict.matrix, &w.values, res.lambda, 100_000);
        let f_ref = common::objective(&y, &phi.matrix, &dict.matrix, &w.values, res.lambda, &reference);
        let f = common::objective(&y, &phi.matrix, &dict.matrix, &w.values, res.lambda, &res.x_hat);
        assert!((f - f_ref).abs() <= 1e-5 * f_ref.abs(), "seed {seed}: {f} vs {f_ref}");
        let report = optimality_report(&res, &y, &phi, &dict, &w);
        assert!(report.stationarity_residual <= 1e-5 * report.residual_scale);
        assert!(report.objective <= report.objective_at_zero);
    }
}

#[test]
fn zero_measurements_give_zero() {
    let dict = build_mfod(&[4.0], 16).unwrap();
    let phi = bernoulli_matrix(8, 16, 3).unwrap();
    let res = solve_al1(&DVector::zeros(8), &phi, &dict, &tight()).unwrap();
    assert!(res.x_hat.amax() < 1e-12);
}

#[test]
fn full_rank_sensing_with_tiny_lambda_recovers_signal() {
    let n = 16;
    let dict = build_mfod(&[2.0], n).unwrap();
    let phi = bernoulli_matrix(n, n, 11).unwrap();
    let x = random_signal(n, 5);
    let y = &phi.matrix * &x;
    let cfg = SolverConfig { lambda: Some(1e-9), ..tight() };
    let res = solve_al1(&y, &phi, &dict, &cfg).unwrap();
    let err = (&res.x_hat - &x).amax();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn reconstructor_rejects_mismatched_shapes() {
    assert!(Reconstructor::from_matrices(DMatrix::zeros(4, 8), DMatrix::zeros(8, 6)).is_err());
    let dict = build_mfod(&[4.0], 16).unwrap();
    let phi = bernoulli_matrix(8, 16, 0).unwrap();
    let bad_y = DVector::zeros(7);
    assert!(solve_al1(&bad_y, &phi, &dict, &tight()).is_err());
    let bad_w = WeightVector::uniform(3);
    assert!(solve_walm(&DVector::zeros(8), &phi, &dict, &bad_w, &tight()).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        SolverConfig { lambda: Some(0.0), ..SolverConfig::default() },
        SolverConfig { lambda_scale: -1.0, ..SolverConfig::default() },
        SolverConfig { penalty: 0.0, ..SolverConfig::default() },
        SolverConfig { relaxation: 2.0, ..SolverConfig::default() },
        SolverConfig { abs_tol: 0.0, ..SolverConfig::default() },
        SolverConfig { max_iter: 0, ..SolverConfig::default() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}

#[test]
fn explicit_noise_hint_sets_lambda() {
    let phi = bernoulli_matrix(8, 16, 0).unwrap();
    let cfg = SolverConfig { noise_sigma_hint: Some(0.5), ..SolverConfig::default() };
    let y = DVector::from_element(8, 1.0);
    assert!((cfg.resolve_lambda(&phi, &y) - std::f64::consts::SQRT_2 * 0.25).abs() < 1e-15);
}

#[test]
fn tight_frame_dictionary_converges() {
    let n = 32;
    let dict = build_random_tight_frame(96, n, 9).unwrap();
    let phi = bernoulli_matrix(16, n, 2).unwrap();
    let y = &phi.matrix * random_signal(n, 3);
    let res = solve_al1(&y, &phi, &dict, &tight()).unwrap();
    assert!(res.converged);
    let report = optimality_report(&res, &y, &phi, &dict, &WeightVector::uniform(96));
    assert!(report.stationarity_residual <= 1e-5 * report.residual_scale);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn uniform_weights_reduce_to_al1(seed in 0u64..1000) {
        let n = 32;
        let dict = build_mfod(&[3.5, 4.0, 4.5], n).unwrap();
        let phi = bernoulli_matrix(16, n, seed).unwrap();
        let y = &phi.matrix * random_signal(n, seed + 1);
        let a = solve_al1(&y, &phi, &dict, &tight()).unwrap();
        let b = solve_walm(&y, &phi, &dict, &WeightVector::uniform(dict.rows()), &tight()).unwrap();
        prop_assert!((&a.x_hat - &b.x_hat).amax() <= 1e-8);
    }

    #[test]
    fn weight_scale_trades_against_lambda(seed in 0u64..1000, s in 0.25f64..4.0) {
        // λ·(s·w) and (λ·s)·w define the same program.
        let n = 24;
        let dict = build_mfod(&[3.0, 4.0], n).unwrap();
        let phi = bernoulli_matrix(12, n, seed).unwrap();
        let y = &phi.matrix * random_signal(n, seed + 7);
        let w = WeightVector::from_groups(&[1.0, 2.0], n);
        let ws = WeightVector::from_groups(&[s, 2.0 * s], n);
        let cfg = SolverConfig { lambda: Some(0.05), ..tight() };
        let cfg_s = SolverConfig { lambda: Some(0.05 * s), ..tight() };
        let a = solve_walm(&y, &phi, &dict, &ws, &cfg).unwrap();
        let b = solve_walm(&y, &phi, &dict, &w, &cfg_s).unwrap();
        let fa = common::objective(&y, &phi.matrix, &dict.matrix, &w.values, 0.05 * s, &a.x_hat);
        let fb = common::objective(&y, &phi.matrix, &dict.matrix, &w.values, 0.05 * s, &b.x_hat);
        prop_assert!((fa - fb).abs() <= 1e-7 * fa.abs().max(1.0));
    }

    #[test]
    fn never_worse_than_zero(seed in 0u64..1000) {
        let n = 32;
        let dict = build_mfod(&[4.0], n).unwrap();
        let phi = bernoulli_matrix(16, n, seed).unwrap();
        let y = &phi.matrix * random_signal(n, seed + 3);
        let cfg = SolverConfig { max_iter: 200, ..SolverConfig::default() };
        let r = solve_al1(&y, &phi, &dict, &cfg).unwrap();
        let report = optimality_report(&r, &y, &phi, &dict, &WeightVector::uniform(n));
        prop_assert!(report.objective <= report.objective_at_zero);
    }
}
