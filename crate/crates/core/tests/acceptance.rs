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


//! Acceptance suite. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line each and exits non-zero if any fails.
//!
//! Set `SPIKECS_EASY1` to a converted Easy1 dataset (CSV or raw binary) to
//! also check the tightened good-probability targets on that recording.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spikecs::experiment::{run_classification, run_sweep, ExperimentConfig, SweepRun};
use spikecs::fracdiff::{build_mfod, difference_matrix, fod_coefficients};
use spikecs::prior::{estimate_order_sigma, fit_variance_model, WeightVector};
use spikecs::sensing::bernoulli_matrix;
use spikecs::solver::{optimality_report, solve_al1, solve_walm, SolverConfig};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

fn tight() -> SolverConfig {
    SolverConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-9,
        max_iter: 100_000,
        ..SolverConfig::default()
    }
}

fn semigroup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let a = rng.random_range(0.0..5.0);
        let b = rng.random_range(0.0..5.0);
        let prod = difference_matrix(a, 32).unwrap() * difference_matrix(b, 32).unwrap();
        let sum = difference_matrix(a + b, 32).unwrap();
        worst = worst.max(max_abs(&(&prod - &sum)) / max_abs(&sum));
    }
    ensure(worst <= 1e-10, format!("worst relative error {worst:.2e}"))
}

fn integer_reduction() -> Outcome {
    for r in 0..=20u64 {
        let c = fod_coefficients(r as f64, r as usize + 1).unwrap().coeffs;
        for k in 0..=r {
            let exact = common::signed_binomial(r, k);
            if c[k as usize] != exact as f64 {
                return Err(format!("r={r} k={k}: {} vs {exact}", c[k as usize]));
            }
        }
    }
    Ok("r = 0..20 exact".into())
}

fn solver_optimality() -> Outcome {
    let (n, m) = (32, 16);
    let dict = build_mfod(&[3.5, 4.0, 4.5], n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst_stat, mut worst_obj) = (0.0_f64, 0.0_f64);
    for inst in 0..20u64 {
        let phi = bernoulli_matrix(m, n, 500 + inst).unwrap();
        let y = &phi.matrix * gaussian(n, &mut rng);
        let groups: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..2.0)).collect();
        let w = WeightVector::from_groups(&groups, n);
        let res = solve_walm(&y, &phi, &dict, &w, &tight()).map_err(|e| e.to_string())?;
        let report = optimality_report(&res, &y, &phi, &dict, &w);
        worst_stat = worst_stat.max(report.stationarity_residual / report.residual_scale);
        let reference =
            common::primal_dual_reference(&y, &phi.matrix, &dict.matrix, &w.values, res.lambda, 100_000);
        let f_ref = common::objective(&y, &phi.matrix, &dict.matrix, &w.values, res.lambda, &reference);
        worst_obj = worst_obj.max((report.objective - f_ref).abs() / f_ref.abs());
    }
    ensure(
        worst_stat <= 1e-5 && worst_obj <= 1e-5,
        format!("worst stationarity {worst_stat:.2e}·(1+‖Φᵀy‖), worst objective gap {worst_obj:.2e}"),
    )
}

fn al1_walm_reduction() -> Outcome {
    let n = 32;
    let dict = build_mfod(&[3.5, 4.0, 4.5], n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut worst = 0.0_f64;
    for inst in 0..10u64 {
        let phi = bernoulli_matrix(16, n, 900 + inst).unwrap();
        let y = &phi.matrix * gaussian(n, &mut rng);
        let a = solve_al1(&y, &phi, &dict, &tight()).map_err(|e| e.to_string())?;
        let b = solve_walm(&y, &phi, &dict, &WeightVector::uniform(dict.rows()), &tight())
            .map_err(|e| e.to_string())?;
        worst = worst.max((&a.x_hat - &b.x_hat).amax());
    }
    ensure(worst <= 1e-8, format!("max deviation {worst:.2e}"))
}

fn regression_recovery() -> Outcome {
    let (a, b, c): (f64, f64, f64) = (0.37, -1.2, 5.5);
    let pts: Vec<(f64, f64)> = (0..=16)
        .map(|i| {
            let f = i as f64 * 0.5;
            (f, (0.5 * (c.log2() - 2.0 * a * f * f - 2.0 * b * f)).exp2())
        })
        .collect();
    let model = fit_variance_model(&pts).map_err(|e| e.to_string())?;
    let fit_err = (model.a - a).abs().max((model.b - b).abs()).max((model.c - c).abs());

    let sigma = 1.7;
    let scale = sigma / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let u: f64 = rng.random::<f64>() - 0.5;
            -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        })
        .collect();
    let frames: Vec<&[f64]> = samples.chunks(100).collect();
    let est = estimate_order_sigma(&frames, 0.0).map_err(|e| e.to_string())?;
    let rel = (est - sigma).abs() / sigma;
    ensure(
        fit_err <= 1e-9 && rel <= 0.02,
        format!("coefficient error {fit_err:.2e}, Laplacian sigma off by {:.2}%", 100.0 * rel),
    )
}

fn scratch_keep(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("spikecs-acceptance-{}-{name}", std::process::id()))
}

fn scratch(name: &str) -> PathBuf {
    let dir = scratch_keep(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn mean_prd(run: &SweepRun, label: &str, m: usize) -> Result<f64, String> {
    run.rows(label)
        .and_then(|rows| rows.iter().find(|r| r.m == m))
        .map(|r| r.mean_prd)
        .ok_or_else(|| format!("no row for {label} at M={m}"))
}

fn dictionary_ordering() -> Outcome {
    let dir = scratch("ordering");
    let cfg = ExperimentConfig {
        frames_per_unit: 70,
        trials: 1,
        measurements: vec![16, 32],
        methods: vec!["al1".into(), "al1:3,4,5".into(), "al1:4".into(), "al1:rtf".into()],
        output_dir: dir.clone(),
        ..ExperimentConfig::default()
    };
    let run = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let spikes = run.manifest.dataset.as_ref().map_or(0, |d| d.evaluation_frames);
    let _ = std::fs::remove_dir_all(&dir);
    if spikes < 200 {
        return Err(format!("only {spikes} spikes evaluated"));
    }
    let chain = ["al1", "al1-3-4-5", "al1-4", "al1-rtf"];
    let mut ok = true;
    let mut detail = format!("{spikes} spikes;");
    for m in [16, 32] {
        let prds = chain.iter().map(|l| mean_prd(&run, l, m)).collect::<Result<Vec<_>, _>>()?;
        ok &= prds.windows(2).all(|w| w[0] <= w[1] + 0.5);
        detail += &format!(
            " M={m}: MFOD {:.2} MIOD {:.2} IOD {:.2} RTF {:.2};",
            prds[0], prds[1], prds[2], prds[3]
        );
    }
    ensure(ok, detail.trim_end_matches(';').into())
}

fn fig7_config(dir: &Path, threads: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        trials: 2,
        max_spikes: Some(150),
        master_seed: 1,
        output_dir: dir.to_path_buf(),
        threads,
        ..ExperimentConfig::default()
    }
}

fn walm_vs_al1(run: &SweepRun, measurements: &[usize]) -> (bool, String) {
    let mut ok = true;
    let mut worse = Vec::new();
    for &m in measurements {
        match (mean_prd(run, "walm", m), mean_prd(run, "al1", m)) {
            (Ok(w), Ok(a)) if w <= a => {}
            (Ok(w), Ok(a)) => {
                ok = false;
                worse.push(format!("M={m} {w:.3}>{a:.3}"));
            }
            _ => {
                ok = false;
                worse.push(format!("M={m} missing"));
            }
        }
    }
    let note = if worse.is_empty() { "WALM <= AL1 at every M".into() } else { worse.join(", ") };
    (ok, note)
}

fn walm_reconstruction() -> Outcome {
    let dir = scratch("fig7");
    let cfg = fig7_config(&dir, None);
    let run = run_sweep(&cfg).map_err(|e| e.to_string())?;
    // The output stays behind as the reference for the determinism check.
    let at32 = run
        .rows("walm")
        .and_then(|r| r.iter().find(|r| r.m == 32))
        .ok_or("no WALM row at M=32")?;
    let (ordered, note) = walm_vs_al1(&run, &cfg.measurements);
    let mut ok = ordered && at32.mean_prd < 5.0 && at32.good_probability >= 90.0;
    let mut detail = format!(
        "M=32 WALM mean PRD {:.3}%, good {:.1}%; {note}",
        at32.mean_prd, at32.good_probability
    );
    if let Some(path) = std::env::var_os("SPIKECS_EASY1") {
        let (easy_ok, easy) = easy1(PathBuf::from(path))?;
        ok &= easy_ok;
        detail += &format!("; Easy1: {easy}");
    }
    ensure(ok, detail)
}

/// Good-probability targets on a converted Easy1 recording.
fn easy1(path: PathBuf) -> Result<(bool, String), String> {
    let dir = scratch("easy1");
    let cfg = ExperimentConfig {
        dataset: Some(path),
        measurements: vec![16, 32],
        methods: vec!["walm".into()],
        output_dir: dir.clone(),
        ..ExperimentConfig::default()
    };
    let run = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    let good = |m: usize| {
        run.rows("walm")
            .and_then(|r| r.iter().find(|r| r.m == m))
            .map_or(f64::NAN, |r| r.good_probability)
    };
    let (g16, g32) = (good(16), good(32));
    let ok = (g32 - 97.7).abs() <= 5.0 && (g16 - 92.5).abs() <= 5.0;
    Ok((ok, format!("good {g16:.1}% at M=16, {g32:.1}% at M=32")))
}

fn classification() -> Outcome {
    let dir = scratch("classify");
    let cfg = ExperimentConfig {
        methods: vec!["walm".into()],
        classify_measurements: 16,
        features: 10,
        feature_kind: "pca".into(),
        master_seed: 1,
        output_dir: dir.clone(),
        ..ExperimentConfig::default()
    };
    let run = run_classification(&cfg).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    let walm = run.accuracy("walm").ok_or("no WALM result")?;
    let original = run.accuracy("original").ok_or("no original result")?;
    ensure(
        walm >= 90.0 && original >= walm,
        format!("WALM accuracy {walm:.2}%, original {original:.2}%"),
    )
}

fn csv_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect()
        })
        .unwrap_or_default()
}

fn determinism() -> Outcome {
    // Reruns the reconstruction sweep on four worker threads and compares
    // against the first run, which used the default pool.
    let (a, b) = (scratch_keep("fig7"), scratch("det"));
    if csv_bytes(&a).is_empty() {
        run_sweep(&fig7_config(&a, None)).map_err(|e| e.to_string())?;
    }
    run_sweep(&fig7_config(&b, Some(4))).map_err(|e| e.to_string())?;
    let (fa, fb) = (csv_bytes(&a), csv_bytes(&b));
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
    ensure(
        !fa.is_empty() && fa == fb,
        format!("{} CSV files identical between the rerun on 4 threads and the first run", fa.len()),
    )
}

fn main() {
    // Libtest flags such as `--nocapture` or a name filter are accepted and ignored.
    let criteria = [
        Criterion { name: "fractional difference semigroup", limit: Some(Duration::from_secs(5)), run: semigroup },
        Criterion { name: "integer-order reduction", limit: None, run: integer_reduction },
        Criterion { name: "solver optimality", limit: Some(Duration::from_secs(120)), run: solver_optimality },
        Criterion { name: "AL1/WALM reduction", limit: None, run: al1_walm_reduction },
        Criterion { name: "regression recovery", limit: None, run: regression_recovery },
        Criterion { name: "dictionary ordering", limit: Some(Duration::from_secs(600)), run: dictionary_ordering },
        Criterion { name: "WALM reconstruction", limit: None, run: walm_reconstruction },
        Criterion { name: "spike classification", limit: None, run: classification },
        Criterion { name: "determinism", limit: None, run: determinism },
    ];
    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(d), Some(limit)) if elapsed > limit => Err(format!("{d}; took {elapsed:.1?} > {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(d) => println!("PASS {} ({elapsed:.1?}): {d}", c.name),
            Err(d) => {
                failed += 1;
                println!("FAIL {} ({elapsed:.1?}): {d}", c.name);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
