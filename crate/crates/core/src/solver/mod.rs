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

//! Weighted analysis ℓ1 reconstruction
//!
//! ```text
//! minimize_x  ½‖y − Φx‖² + λ ‖diag(w) Ω x‖₁
//! ```
//!
//! solved by ADMM on the splitting `z = Ωx` with scaled dual `u`:
//!
//! ```text
//! x ← (ΦᵀΦ + ρΩᵀΩ)⁻¹ (Φᵀy + ρΩᵀ(z − u))
//! z ← soft(Ωx + u, λw/ρ)
//! u ← u + Ωx − z
//! ```
//!
//! Every difference block of Ω is unit upper-triangular, so `ΩᵀΩ` is positive
//! definite and the x-update is well posed for any Φ. Uniform weights give the
//! plain analysis ℓ1 program.

mod report;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracdiff::AnalysisDictionary;
use crate::prior::WeightVector;
use crate::sensing::SensingMatrix;

pub use report::{optimality_report, OptimalityReport};

/// Residual ratio that triggers a penalty update.
const BALANCE_RATIO: f64 = 10.0;
/// Multiplicative penalty step.
const BALANCE_FACTOR: f64 = 2.0;
/// Penalty adaptation is only considered every this many iterations.
const BALANCE_EVERY: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Explicit regularization weight. When unset, `sqrt(2)·σ_e²` is used if a
    /// positive noise hint is present, otherwise `lambda_scale · ‖Φᵀy‖∞`.
    pub lambda: Option<f64>,
    pub lambda_scale: f64,
    pub noise_sigma_hint: Option<f64>,
    /// Initial augmented-Lagrangian penalty ρ.
    pub penalty: f64,
    pub adaptive_penalty: bool,
    /// Over-relaxation factor in `(0, 2)`; 1 is plain ADMM.
    pub relaxation: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: None,
            lambda_scale: 0.01,
            noise_sigma_hint: None,
            penalty: 1.0,
            adaptive_penalty: true,
            relaxation: 1.6,
            abs_tol: 1e-7,
            rel_tol: 1e-5,
            max_iter: 5000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if !(self.lambda_scale > 0.0 && self.lambda_scale.is_finite()) {
            return bad(format!("lambda_scale must be positive, got {}", self.lambda_scale));
        }
        if let Some(s) = self.noise_sigma_hint {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("noise_sigma_hint must be >= 0, got {s}"));
            }
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad(format!("penalty must be positive, got {}", self.penalty));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad(format!("relaxation must be in (0, 2), got {}", self.relaxation));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1".into());
        }
        Ok(())
    }

    /// The λ actually used for measurements `y`.
    pub fn resolve_lambda(&self, phi: &SensingMatrix, y: &DVector<f64>) -> f64 {
        self.lambda_for(phi.matrix.tr_mul(y).amax())
    }

    fn lambda_for(&self, phit_y_max: f64) -> f64 {
        if let Some(l) = self.lambda {
            return l;
        }
        match self.noise_sigma_hint {
            Some(s) if s > 0.0 => std::f64::consts::SQRT_2 * s * s,
            // y = 0 has the unique minimizer x = 0 for any λ > 0
            _ => self.lambda_scale * if phit_y_max > 0.0 { phit_y_max } else { 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x_hat: DVector<f64>,
    /// Split variable `z ≈ Ωx̂`; exact zeros mark the estimated co-support.
    pub z: DVector<f64>,
    /// Unscaled multiplier `ρu`, an element of `λ·diag(w)·∂‖z‖₁` at a solution.
    pub dual: DVector<f64>,
    pub lambda: f64,
    pub penalty: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_threshold: f64,
    pub dual_threshold: f64,
    pub objective: f64,
    pub converged: bool,
}

/// Objective `½‖y − Φx‖² + λ Σ w_i |(Ωx)_i|`.
pub fn objective(
    y: &DVector<f64>,
    phi: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    w: &DVector<f64>,
    lambda: f64,
    x: &DVector<f64>,
) -> f64 {
    let r = phi * x - y;
    let z = omega * x;
    0.5 * r.norm_squared() + lambda * z.iter().zip(w.iter()).map(|(a, b)| a.abs() * b).sum::<f64>()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Fixed (Φ, Ω) pair with cached factorizations of `ΦᵀΦ + ρΩᵀΩ`, shared by
/// every reconstruction that uses the same sensing matrix and dictionary.
pub struct Reconstructor {
    phi: DMatrix<f64>,
    omega: DMatrix<f64>,
    gram_phi: DMatrix<f64>,
    gram_omega: DMatrix<f64>,
    factors: Mutex<HashMap<u64, Arc<Cholesky<f64, Dyn>>>>,
}

impl Reconstructor {
    pub fn new(phi: &SensingMatrix, dict: &AnalysisDictionary) -> Result<Self> {
        Self::from_matrices(phi.matrix.clone(), dict.matrix.clone())
    }

    pub fn from_matrices(phi: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        if phi.ncols() != omega.ncols() {
            return Err(Error::DimensionMismatch {
                what: "dictionary columns vs sensing matrix columns",
                expected: phi.ncols(),
                got: omega.ncols(),
            });
        }
        let gram_phi = phi.tr_mul(&phi);
        let gram_omega = omega.tr_mul(&omega);
        Ok(Reconstructor {
            phi,
            omega,
            gram_phi,
            gram_omega,
            factors: Mutex::new(HashMap::new()),
        })
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    fn factor(&self, penalty: f64) -> Result<Arc<Cholesky<f64, Dyn>>> {
        let key = penalty.to_bits();
        if let Some(f) = self.factors.lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let a = &self.gram_phi + &self.gram_omega * penalty;
        let chol = Cholesky::new(a).ok_or_else(|| {
            Error::InvalidShape("ΦᵀΦ + ρΩᵀΩ is not positive definite".into())
        })?;
        let chol = Arc::new(chol);
        self.factors.lock().unwrap().insert(key, chol.clone());
        Ok(chol)
    }

    pub fn solve(
        &self,
        y: &DVector<f64>,
        weights: &WeightVector,
        config: &SolverConfig,
    ) -> Result<SolverResult> {
        config.validate()?;
        let (m, n) = self.phi.shape();
        let l = self.omega.nrows();
        if y.len() != m {
            return Err(Error::DimensionMismatch {
                what: "measurement length vs sensing matrix rows",
                expected: m,
                got: y.len(),
            });
        }
        if weights.len() != l {
            return Err(Error::DimensionMismatch {
                what: "weight length vs dictionary rows",
                expected: l,
                got: weights.len(),
            });
        }
        if weights.values.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("weights must be positive and finite".into()));
        }
        let w = &weights.values;
        let phit_y = self.phi.tr_mul(y);
        let lambda = config.lambda_for(phit_y.amax());
        let mut rho = config.penalty;
        let mut chol = self.factor(rho)?;

        let mut x = DVector::zeros(n);
        let mut omega_x = DVector::zeros(l);
        let mut z = DVector::<f64>::zeros(l);
        let mut z_old = DVector::<f64>::zeros(l);
        let mut u = DVector::<f64>::zeros(l);
        let mut v = DVector::<f64>::zeros(l);
        let mut rhs = DVector::<f64>::zeros(n);
        let mut back = DVector::<f64>::zeros(n);

        let sqrt_l = (l as f64).sqrt();
        let sqrt_n = (n as f64).sqrt();
        let mut iterations = 0;
        let mut converged = false;
        let (mut r_norm, mut s_norm, mut eps_pri, mut eps_dual) = (0.0, 0.0, 0.0, 0.0);

        for it in 1..=config.max_iter {
            iterations = it;
            // x-update
            v.copy_from(&z);
            v -= &u;
            rhs.copy_from(&phit_y);
            rhs.gemv_tr(rho, &self.omega, &v, 1.0);
            chol.solve_mut(&mut rhs);
            x.copy_from(&rhs);
            omega_x.gemv(1.0, &self.omega, &x, 0.0);

            // z- and dual updates on the relaxed point α·Ωx + (1 − α)·z
            z_old.copy_from(&z);
            let alpha = config.relaxation;
            for i in 0..l {
                let relaxed = alpha * omega_x[i] + (1.0 - alpha) * z_old[i];
                z[i] = soft_threshold(relaxed + u[i], lambda * w[i] / rho);
                u[i] += relaxed - z[i];
            }

            // residuals
            r_norm = omega_x.metric_distance(&z);
            v.copy_from(&z);
            v -= &z_old;
            back.gemv_tr(rho, &self.omega, &v, 0.0);
            s_norm = back.norm();
            back.gemv_tr(rho, &self.omega, &u, 0.0);
            eps_pri = sqrt_l * config.abs_tol + config.rel_tol * omega_x.norm().max(z.norm());
            eps_dual = sqrt_n * config.abs_tol + config.rel_tol * back.norm();
            if r_norm <= eps_pri && s_norm <= eps_dual {
                converged = true;
                break;
            }

            if config.adaptive_penalty && it % BALANCE_EVERY == 0 {
                // Residuals are compared relative to their own scales.
                let rr = r_norm / omega_x.norm().max(z.norm()).max(f64::MIN_POSITIVE);
                let ss = s_norm / back.norm().max(f64::MIN_POSITIVE);
                let new_rho = if rr > BALANCE_RATIO * ss {
                    rho * BALANCE_FACTOR
                } else if ss > BALANCE_RATIO * rr {
                    rho / BALANCE_FACTOR
                } else {
                    rho
                };
                if new_rho != rho {
                    // keep the unscaled multiplier ρu fixed
                    u *= rho / new_rho;
                    rho = new_rho;
                    chol = self.factor(rho)?;
                }
            }
        }

        let objective = objective(y, &self.phi, &self.omega, w, lambda, &x);
        Ok(SolverResult {
            x_hat: x,
            z,
            dual: u * rho,
            lambda,
            penalty: rho,
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
            primal_threshold: eps_pri,
            dual_threshold: eps_dual,
            objective,
            converged,
        })
    }
}

/// Weighted analysis ℓ1 reconstruction of one measurement vector.
pub fn solve_walm(
    y: &DVector<f64>,
    phi: &SensingMatrix,
    dict: &AnalysisDictionary,
    w: &WeightVector,
    config: &SolverConfig,
) -> Result<SolverResult> {
    Reconstructor::new(phi, dict)?.solve(y, w, config)
}

/// Unweighted analysis ℓ1 reconstruction.
pub fn solve_al1(
    y: &DVector<f64>,
    phi: &SensingMatrix,
    dict: &AnalysisDictionary,
    config: &SolverConfig,
) -> Result<SolverResult> {
    solve_walm(y, phi, dict, &WeightVector::uniform(dict.rows()), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracdiff::build_mfod;

    fn identity_problem() -> (SensingMatrix, AnalysisDictionary) {
        let phi = SensingMatrix {
            m: 2,
            n: 2,
            seed: 0,
            scale: 1.0,
            matrix: DMatrix::identity(2, 2),
        };
        (phi, build_mfod(&[0.0], 2).unwrap())
    }

    fn tight() -> SolverConfig {
        SolverConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 20000,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn tiny_lambda_returns_measurements() {
        let (phi, dict) = identity_problem();
        let y = DVector::from_vec(vec![1.5, -0.25]);
        let cfg = SolverConfig {
            lambda: Some(1e-12),
            ..tight()
        };
        let r = solve_al1(&y, &phi, &dict, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.x_hat - y).amax() < 1e-9);
    }

    #[test]
    fn identity_problem_is_soft_threshold() {
        let (phi, dict) = identity_problem();
        let y = DVector::from_vec(vec![3.0, 0.5]);
        let cfg = SolverConfig {
            lambda: Some(1.0),
            ..tight()
        };
        let r = solve_al1(&y, &phi, &dict, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.x_hat[0] - 2.0).abs() < 1e-9 && r.x_hat[1].abs() < 1e-9);
        assert!((r.objective - (0.5 * (1.0 + 0.25) + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn al1_is_walm_with_unit_weights() {
        let phi = crate::sensing::bernoulli_matrix(6, 12, 3).unwrap();
        let dict = build_mfod(&[1.0, 1.5], 12).unwrap();
        let y = DVector::from_fn(6, |i, _| (i as f64 * 0.7).cos());
        let cfg = SolverConfig::default();
        let a = solve_al1(&y, &phi, &dict, &cfg).unwrap();
        let b = solve_walm(&y, &phi, &dict, &WeightVector::uniform(24), &cfg).unwrap();
        assert_eq!(a.x_hat, b.x_hat);
    }

    #[test]
    fn dimension_errors() {
        let (phi, dict) = identity_problem();
        let cfg = SolverConfig::default();
        assert!(solve_al1(&DVector::zeros(3), &phi, &dict, &cfg).is_err());
        assert!(solve_walm(&DVector::zeros(2), &phi, &dict, &WeightVector::uniform(5), &cfg).is_err());
        let bad = WeightVector {
            values: DVector::from_vec(vec![1.0, -1.0]),
            group_len: 2,
        };
        assert!(solve_walm(&DVector::zeros(2), &phi, &dict, &bad, &cfg).is_err());
        let big = build_mfod(&[1.0], 3).unwrap();
        assert!(solve_al1(&DVector::zeros(2), &phi, &big, &cfg).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let phi = crate::sensing::bernoulli_matrix(8, 32, 1).unwrap();
        let dict = build_mfod(&[3.5, 4.0, 4.5], 32).unwrap();
        let y = DVector::from_fn(8, |i, _| i as f64 - 3.0);
        let cfg = SolverConfig {
            max_iter: 2,
            ..SolverConfig::default()
        };
        let r = solve_al1(&y, &phi, &dict, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn invalid_config_rejected() {
        let (phi, dict) = identity_problem();
        let y = DVector::zeros(2);
        for cfg in [
            SolverConfig { lambda: Some(0.0), ..SolverConfig::default() },
            SolverConfig { penalty: -1.0, ..SolverConfig::default() },
            SolverConfig { max_iter: 0, ..SolverConfig::default() },
            SolverConfig { abs_tol: 0.0, ..SolverConfig::default() },
        ] {
            assert!(solve_al1(&y, &phi, &dict, &cfg).is_err());
        }
    }

    #[test]
    fn map_lambda_from_noise_hint() {
        let (phi, _) = identity_problem();
        let cfg = SolverConfig {
            noise_sigma_hint: Some(0.5),
            ..SolverConfig::default()
        };
        let y = DVector::from_vec(vec![1.0, 1.0]);
        assert!((cfg.resolve_lambda(&phi, &y) - 2f64.sqrt() * 0.25).abs() < 1e-15);
        let cfg = SolverConfig::default();
        assert!((cfg.resolve_lambda(&phi, &y) - 0.01).abs() < 1e-15);
    }
}

