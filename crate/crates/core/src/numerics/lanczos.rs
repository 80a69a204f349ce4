//! Shift–invert Lanczos for the lowest eigenpairs of symmetric (generalized)
//! banded problems A x = λ M x with diagonal positive M.

use super::banded::SymBanded;
use super::tridiag::SymTridiag;
use crate::error::WaveError;
use crate::Result;

/// Lowest `k` eigenpairs of `A x = λ diag(m) x`.
///
/// The problem is symmetrized to B = M^{−1/2} A M^{−1/2}, shifted below its
/// spectrum (Gershgorin bound), factorized by banded Cholesky, and the
/// inverse operator is run through Lanczos with full reorthogonalization.
/// Returned eigenvectors are M-orthonormal with the leading significant
/// component positive. Deterministic start vector.
pub fn lowest_generalized(a: &SymBanded, m: &[f64], k: usize, steps: usize) -> Result<Eigs> {
    let n = a.n;
    if m.len() != n || k == 0 {
        return Err(WaveError::InvalidInput { what: "lanczos: bad sizes" });
    }
    let mut sqrt_m_inv = vec![0.0; n];
    for i in 0..n {
        if m[i] <= 0.0 {
            return Err(WaveError::InvalidInput { what: "lanczos: mass must be positive" });
        }
        sqrt_m_inv[i] = 1.0 / m[i].sqrt();
    }
    // B = M^{-1/2} A M^{-1/2}
    let mut b = SymBanded::zeros(n, a.bw);
    let w = a.bw + 1;
    for i in 0..n {
        let jlo = i.saturating_sub(a.bw);
        for j in jlo..=i {
            let v = a.data[i * w + (i - j)];
            b.data[i * w + (i - j)] = v * sqrt_m_inv[i] * sqrt_m_inv[j];
        }
    }
    // shift just below the spectrum: start at min(0, ·) − 1 and back off
    // geometrically until the shifted matrix is positive definite
    let mut sigma = -1.0;
    let mut factor = b.diag_shifted(-sigma);
    let mut tries = 0;
    while !factor.cholesky() {
        sigma -= 2.0_f64.powi(tries);
        factor = b.diag_shifted(-sigma);
        tries += 1;
        if tries > 60 {
            return Err(WaveError::InternalInconsistency { what: "shift-invert factorization failed" });
        }
    }

    let mm = steps.max(2 * k + 10).min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(mm);
    let mut alphas = Vec::with_capacity(mm);
    let mut betas: Vec<f64> = Vec::new();

    let mut v = deterministic_start(n);
    normalize(&mut v);
    basis.push(v.clone());
    let mut prev_beta = 0.0;
    let mut prev: Option<Vec<f64>> = None;
    for j in 0..mm {
        let mut wvec = factor.chol_solve(&basis[j]);
        if let Some(p) = &prev {
            axpy(&mut wvec, -prev_beta, p);
        }
        let alpha = dot(&wvec, &basis[j]);
        axpy(&mut wvec, -alpha, &basis[j]);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(&wvec, q);
                axpy(&mut wvec, -c, q);
            }
        }
        alphas.push(alpha);
        let beta = norm(&wvec);
        if j + 1 == mm || beta < 1e-13 * alpha.abs().max(1.0) {
            break;
        }
        betas.push(beta);
        for x in wvec.iter_mut() {
            *x /= beta;
        }
        prev = Some(basis[j].clone());
        prev_beta = beta;
        basis.push(wvec);
    }

    let t = SymTridiag { diag: alphas.clone(), off: betas.clone() };
    let nt = t.n();
    // largest Ritz values of the inverse operator = smallest eigenvalues of B
    let all = t.lowest_eigenvalues(nt);
    let kk = k.min(nt);
    let mut values = Vec::with_capacity(kk);
    let mut vectors = Vec::with_capacity(kk);
    for idx in 0..kk {
        let theta = all[nt - 1 - idx];
        let y = t.eigenvector(theta);
        let mut x = vec![0.0; n];
        for (j, q) in basis.iter().enumerate() {
            axpy(&mut x, y[j], q);
        }
        normalize(&mut x);
        // eigenvalue from the Rayleigh quotient of B (more accurate than σ + 1/θ)
        let bx = b.matvec(&x);
        let lam = dot(&bx, &x);
        // back to the generalized problem: u = M^{-1/2} x, M-orthonormal
        let mut u = x;
        for i in 0..n {
            u[i] *= sqrt_m_inv[i];
        }
        sign_fix(&mut u);
        values.push(lam);
        vectors.push(u);
    }
    // ascending
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&p, &q| values[p].partial_cmp(&values[q]).unwrap());
    let values_sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors_sorted: Vec<Vec<f64>> = order.iter().map(|&i| vectors[i].clone()).collect();
    Ok(Eigs { values: values_sorted, vectors: vectors_sorted })
}

/// Eigenpairs, ascending.
#[derive(Debug, Clone)]
pub struct Eigs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Count of eigenvalues of `A x = λ diag(m) x` strictly below `threshold`,
/// by LDLᵀ inertia of the symmetrized shifted matrix.
pub fn count_below_generalized(a: &SymBanded, m: &[f64], threshold: f64) -> Result<usize> {
    let n = a.n;
    let w = a.bw + 1;
    let mut b = SymBanded::zeros(n, a.bw);
    for i in 0..n {
        let jlo = i.saturating_sub(a.bw);
        for j in jlo..=i {
            let v = a.data[i * w + (i - j)];
            b.data[i * w + (i - j)] = v / (m[i].sqrt() * m[j].sqrt());
        }
    }
    let mut shift = threshold;
    for attempt in 0..6 {
        if let Some(c) = b.diag_shifted(-shift).ldlt_negative_count() {
            return Ok(c);
        }
        shift = threshold + (attempt + 1) as f64 * 1e-11;
    }
    Err(WaveError::InternalInconsistency { what: "inertia count failed repeatedly" })
}

fn deterministic_start(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.37 * ((i as f64 + 1.0) * 0.7391).sin()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) {
    let s = norm(v);
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

fn sign_fix(v: &mut [f64]) {
    let lead = v
        .iter()
        .find(|c| c.abs() > 1e-8 * v.iter().fold(0.0_f64, |a, b| a.max(b.abs())))
        .copied()
        .unwrap_or(1.0);
    if lead < 0.0 {
        for c in v.iter_mut() {
            *c = -*c;
        }
    }
}
