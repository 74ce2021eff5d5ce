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


//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Signed binomial `(-1)^k C(r, k)` in exact integer arithmetic.
pub fn signed_binomial(r: u64, k: u64) -> i128 {
    let mut c: i128 = 1;
    for j in 0..k {
        c = c * (r - j) as i128 / (j + 1) as i128;
    }
    if k.is_multiple_of(2) {
        c
    } else {
        -c
    }
}

/// `½‖y − Φx‖² + λ Σ w_i |(Ωx)_i|`.
pub fn objective(
    y: &DVector<f64>,
    phi: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    w: &DVector<f64>,
    lambda: f64,
    x: &DVector<f64>,
) -> f64 {
    let r = y - phi * x;
    let z = omega * x;
    0.5 * r.norm_squared() + lambda * z.iter().zip(w.iter()).map(|(a, b)| a.abs() * b).sum::<f64>()
}

/// Chambolle–Pock primal-dual iteration for the weighted analysis lasso,
/// with the exact proximal step of the quadratic data term.
pub fn primal_dual_reference(
    y: &DVector<f64>,
    phi: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    w: &DVector<f64>,
    lambda: f64,
    iterations: usize,
) -> DVector<f64> {
    let n = phi.ncols();
    let norm = omega.clone().svd(false, false).singular_values.max();
    let tau = 0.99 / norm;
    let sigma = 0.99 / norm;
    let prox = (DMatrix::<f64>::identity(n, n) + phi.tr_mul(phi) * tau)
        .cholesky()
        .expect("SPD");
    let phit_y = phi.tr_mul(y) * tau;
    let bound = w * lambda;
    let mut x = DVector::zeros(n);
    let mut x_bar = x.clone();
    let mut v = DVector::zeros(omega.nrows());
    for _ in 0..iterations {
        v += omega * &x_bar * sigma;
        for (vi, b) in v.iter_mut().zip(bound.iter()) {
            *vi = vi.clamp(-b, *b);
        }
        let rhs = &x - omega.tr_mul(&v) * tau + &phit_y;
        let x_new = prox.solve(&rhs);
        x_bar = &x_new * 2.0 - &x;
        x = x_new;
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-14 * a.norm() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}
